use thiserror::Error;

/// Errors raised by the library.
///
/// `Input` and `Precondition` are caller mistakes; `Invariant` means a numerical
/// consistency check failed and the result cannot be trusted.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
