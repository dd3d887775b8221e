use thiserror::Error;

/// errors shared by every module
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// an input violates a stated precondition
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// a multiplier produced a non-finite value
    #[error("range error: non-finite value at frequency {freq}")]
    Range { freq: f64 },
    /// stepping or quadrature produced NaN or overflow
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// the requested scale is below what the grid resolves
    #[error("unresolved scale: {0}")]
    Unresolved(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Precondition(msg.into()))
}
