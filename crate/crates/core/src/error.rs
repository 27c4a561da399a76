use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite coordinate at index {0}")]
    NonFinite(usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("numerical failure in {context}: residual {residual:e}")]
    NumericalFailure {
        context: &'static str,
        residual: f64,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{operation} is not supported for problem `{problem}`")]
    Unsupported {
        operation: &'static str,
        problem: String,
    },

    #[error(
        "no sampled point satisfies dist(x, X*) >= {epsilon} inside the ball of radius {radius}"
    )]
    InfeasibleRegion { epsilon: f64, radius: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
