//! Crate-wide error type.
//!
//! Errors fall into four groups that the CLI maps onto distinct exit codes:
//! bad caller input, unparseable data, I/O failures, and numerical
//! breakdowns (non-finite losses, non-converging decompositions).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// The caller asked for something inconsistent (bad shapes, empty
    /// inputs, out-of-range parameters).
    #[error("input error: {0}")]
    Input(String),

    /// A file had the right bytes-on-disk shape but unparseable content.
    /// Messages include the offending line where one exists.
    #[error("parse error: {0}")]
    Parse(String),

    /// Plain I/O failure while reading or writing artifacts.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// A computation left the realm of finite floats or an iteration
    /// failed to converge within its budget.
    #[error("numerical error: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}
