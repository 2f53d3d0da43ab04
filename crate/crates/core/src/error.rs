use thiserror::Error;

use crate::problem::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("element {0} is outside the ground set")]
    InvalidElement(String),

    /// A marginal gain below `-MONOTONE_TOL`; the function is not monotone nondecreasing.
    #[error("monotonicity violation: marginal gain {gain:e} is below tolerance")]
    MonotonicityViolation { gain: f64 },

    #[error("unsupported instance structure: {0}")]
    UnsupportedStructure(String),

    #[error("instance is invalid: {0}")]
    InvalidInstance(ValidationReport),

    #[error("ground set of size {size} exceeds the limit of {limit}")]
    SizeLimit { size: usize, limit: usize },

    #[error("exact greedy choice ratios need the optimal reference set")]
    MissingReference,

    #[error("sum of budgets is zero for a nonempty greedy solution")]
    DegenerateBudget,

    #[error("numerically ill-conditioned matrix: {0}")]
    Conditioning(String),

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code for the command-line front end.
    ///
    /// 2 for invalid input, 3 for size limits, 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SizeLimit { .. } => 3,
            Error::Conditioning(_) | Error::MonotonicityViolation { .. } => 4,
            _ => 2,
        }
    }
}
