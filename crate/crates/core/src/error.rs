use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed input: unsorted breakpoints, negative masses, bad intervals.
    #[error("structural error: {0}")]
    Structural(String),
    /// Input is well formed but outside the operation's domain.
    #[error("domain error: {0}")]
    Domain(String),
    /// The weight or measure fails an admissibility condition.
    #[error("inadmissible: {0}")]
    Inadmissible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn structural(msg: impl Into<String>) -> Self {
        Error::Structural(msg.into())
    }
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub(crate) fn inadmissible(msg: impl Into<String>) -> Self {
        Error::Inadmissible(msg.into())
    }
}
