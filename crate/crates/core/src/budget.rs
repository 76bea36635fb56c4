//! Size limits for the exponential or quadratic procedures.

use serde::{Deserialize, Serialize};

/// Default cap on the number of points in a constructed space.
pub const DEFAULT_MAX_POINTS: usize = 4096;
/// Default cap on `|supp μ|·|supp ν|` for the exact order search.
pub const DEFAULT_MAX_CELLS: usize = 400;
/// Default cap on `|X|` for exhaustive subset enumeration.
pub const DEFAULT_MAX_SUBSET_POINTS: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Budgets {
    pub max_points: usize,
    pub max_cells: usize,
    pub max_subset_points: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Self {
            max_points: DEFAULT_MAX_POINTS,
            max_cells: DEFAULT_MAX_CELLS,
            max_subset_points: DEFAULT_MAX_SUBSET_POINTS,
        }
    }
}
