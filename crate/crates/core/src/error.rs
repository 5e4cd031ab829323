use thiserror::Error;

pub type Result<T> = std::result::Result<T, LmgError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LmgError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
}

impl LmgError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        LmgError::InvalidArgument(msg.into())
    }

    pub(crate) fn dims(expected: usize, found: usize) -> Self {
        LmgError::DimensionMismatch { expected, found }
    }
}
