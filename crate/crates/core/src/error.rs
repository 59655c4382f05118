use thiserror::Error;

/// Errors raised by the numerical routines and the report pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid misalignment: {0}")]
    Misaligned(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("singular basis (|det| = {0:e})")]
    SingularBasis(f64),

    #[error("empty sample: {0}")]
    EmptySample(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("operand does not decay at the grid boundary: {0}")]
    BoundaryTail(String),

    #[error("numerical assertion failed: {0}")]
    Assertion(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
