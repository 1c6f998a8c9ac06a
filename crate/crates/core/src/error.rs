use thiserror::Error;

/// Errors raised by the discretization, norm, and solver layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },

    #[error("config error: {0}")]
    Config(String),

    /// A hypothesis clause failed validation; the payload names the clause.
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T, E = MpsError> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(MpsError::Shape { expected, got })
    }
}
