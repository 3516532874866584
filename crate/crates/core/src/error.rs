use thiserror::Error;

/// Errors raised by the simulation and bound routines.
#[derive(Debug, Error)]
pub enum QracError {
    #[error("invalid dimension {0}: must be at least 2")]
    InvalidDimension(usize),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid quantum state: {0}")]
    InvalidState(String),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("not available: {0}")]
    NotAvailable(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, QracError>;

pub(crate) fn check_dim(d: usize) -> Result<()> {
    if d < 2 {
        Err(QracError::InvalidDimension(d))
    } else {
        Ok(())
    }
}
