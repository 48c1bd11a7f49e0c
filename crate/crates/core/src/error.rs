use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// A quantity is infinite at the requested parameter.
    #[error("divergence: {0}")]
    Divergence(String),
    /// Inputs are structurally invalid (empty, mismatched, not closed).
    #[error("usage error: {0}")]
    Usage(String),
    /// A numerical precondition such as unitarity does not hold.
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Format(e.to_string())
    }
}
