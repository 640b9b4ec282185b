use thiserror::Error;

/// Errors surfaced by the library. `InvalidInput` maps to CLI exit code 2,
/// `Numerical` to exit code 3.
#[derive(Debug, Error)]
pub enum ShadowError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A computation finished but violated one of its declared postconditions.
    /// The message names the failing invariant.
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, ShadowError>;

pub(crate) fn invalid(msg: impl Into<String>) -> ShadowError {
    ShadowError::InvalidInput(msg.into())
}

pub(crate) fn numerical(msg: impl Into<String>) -> ShadowError {
    ShadowError::Numerical(msg.into())
}
