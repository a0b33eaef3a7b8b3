use thiserror::Error;

/// Errors raised by the engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// A numerical failure at a given time level (singular regression, NaN, ...).
    #[error("numerical error at level {level}: {msg}")]
    Numerical { level: usize, msg: String },
    /// A density kernel lost positivity: `|q| * sqrt(dt) >= 1`.
    #[error("density positivity lost at level {level}, node {node}: q = {q}")]
    Positivity { level: usize, node: usize, q: f64 },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

pub(crate) fn unsupported<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Unsupported(msg.into()))
}
