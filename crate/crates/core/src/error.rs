use alloc::string::String;
use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoreError {
    /// Two vectors that must have the same coordinate count do not.
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    /// A schedule, stepper or problem was constructed with invalid values.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// A gradient or iterate stopped being finite; the run is aborted.
    #[error("non-finite {what} at iteration {t}")]
    NonFinite { what: &'static str, t: u64 },
}

impl CoreError {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        CoreError::InvalidConfig(msg.into())
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<(), CoreError> {
    if expected == got {
        Ok(())
    } else {
        Err(CoreError::LengthMismatch { expected, got })
    }
}
