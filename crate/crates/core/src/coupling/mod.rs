//! Couplings of atomic measures on ℝ and the quantities built on them.

mod flow;
mod pairset;
mod plan;
mod prohorov;

pub use flow::{band_mass, max_flow, FlowResult};
pub use pairset::{dev_term, PairSet};
pub use plan::{compose_subtransport, quantile_coupling, Plan, PlanCell, PlanJson, DENSE_JSON_LIMIT};
pub use prohorov::{band_coupling_mass, prohorov};
