use thiserror::Error;

/// Errors raised by the isolip library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("atoms not strictly increasing at index {index}: {prev} >= {next}")]
    NotSorted { index: usize, prev: f64, next: f64 },

    #[error("not a probability measure: total mass {mass}")]
    NotProbability { mass: f64 },

    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("invalid space: {0}")]
    InvalidSpace(String),

    #[error("{what} budget exceeded: {size} > {budget}")]
    BudgetExceeded {
        what: &'static str,
        size: usize,
        budget: usize,
    },

    #[error("graph factor {index} is disconnected")]
    Disconnected { index: usize },

    #[error("graph factors have mismatched orders: {expected} vs {found} (factor {index})")]
    OrderMismatch {
        index: usize,
        expected: usize,
        found: usize,
    },

    #[error("function is not 1-Lipschitz: |f({i}) - f({j})| exceeds d({i},{j}) by {excess}")]
    NotLipschitz { i: usize, j: usize, excess: f64 },

    #[error("empty {0}")]
    Empty(&'static str),

    #[error("plans are incompatible: {0}")]
    Incompatible(String),

    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
