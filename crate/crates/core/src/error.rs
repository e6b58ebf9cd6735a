use thiserror::Error;

/// Errors produced by the solvers, generators and readers in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("index {index} out of range for universe of size {universe}")]
    IndexOutOfRange { index: usize, universe: usize },

    #[error("index set is not strictly increasing")]
    Unsorted,

    /// No blocking constraint limits the step along an improving direction.
    #[error("step is unbounded: {0}")]
    Unbounded(String),

    #[error("iteration limit of {limit} reached in {context}")]
    IterationLimit { limit: usize, context: &'static str },

    #[error("starting point is infeasible: {0}")]
    InfeasibleStart(String),

    /// A multiplier system that must be solvable by LP duality was not.
    #[error("multiplier system is inconsistent: {0}")]
    InconsistentMultipliers(String),

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    UnboundedLp,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("value {value} outside of range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
