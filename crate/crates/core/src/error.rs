//! Error type shared across the library.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, DoaError>;

#[derive(Debug, Error)]
pub enum DoaError {
    /// An input violated a domain precondition (angle range, dimension
    /// mismatch, non-positive noise power, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A matrix that must be positive definite (or well conditioned) failed
    /// the factorization that certifies it.
    #[error("singular or indefinite matrix: {0}")]
    Singular(String),

    /// A solver run aborted; the iteration index is attached so failures can
    /// be traced back through a Monte Carlo sweep.
    #[error("solver failed at iteration {iteration}: {reason}")]
    Solver { iteration: usize, reason: String },

    /// Configuration files that fail schema or invariant validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DoaError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        DoaError::InvalidInput(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        DoaError::Singular(msg.into())
    }
}
