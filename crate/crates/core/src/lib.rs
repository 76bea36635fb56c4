//! Iso-Lipschitz order with additive error on finitely-supported measures on
//! the real line and on finite mm-spaces.

pub mod budget;
pub mod coupling;
pub mod error;
pub mod experiments;
pub mod isoorder;
pub mod isoperim;
pub mod lipschitz;
pub mod measure;
pub mod mmspace;
pub mod tol;

pub use budget::Budgets;
pub use coupling::{prohorov, quantile_coupling, PairSet, Plan};
pub use error::{Error, Result};
pub use isoorder::{classic_iso_order, compose_certificates, decide_iso_order, min_s_at_t, OrderCertificate, OrderDecision, SearchMode};
pub use lipschitz::ScalarField;
pub use measure::AtomicMeasure;
pub use mmspace::FiniteMMSpace;
