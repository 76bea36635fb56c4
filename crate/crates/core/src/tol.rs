//! Numerical tolerances shared across modules.

/// Atoms closer than this merge; mass comparisons use it as absolute slack.
pub const MASS: f64 = 1e-12;
/// Slack for plan marginals.
pub const MARGINAL: f64 = 1e-10;
/// Slack for flow-based feasibility (`π(S) ≥ 1 − t`).
pub const FEASIBILITY: f64 = 1e-10;
/// Slack for metric axioms and closed-ball membership.
pub const DISTANCE: f64 = 1e-9;
