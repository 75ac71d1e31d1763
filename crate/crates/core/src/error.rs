use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Arguments violate an operation's preconditions.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The signal admits no positive-definite continuation; it was not
    /// positive definite to begin with.
    #[error("infeasible input: {0}")]
    Infeasible(String),

    /// A numerical routine failed to produce a usable result.
    #[error("numerical failure: {0}")]
    Numeric(String),

    /// Malformed file or configuration text.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
