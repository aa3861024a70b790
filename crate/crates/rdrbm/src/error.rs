//! Error type shared across the crate.

use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to print a one-line
/// actionable message; file and line information is embedded where it exists.
#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or sizes of two related objects disagree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scalar or structural argument is outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A textual input failed to parse. `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// A requested combination of settings cannot be satisfied.
    #[error("infeasible configuration: {0}")]
    Infeasible(String),

    /// Input data lacks the structure an algorithm requires.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    /// An exact computation was requested beyond its enumeration guard.
    #[error("intractable request: {0}")]
    Intractable(String),

    /// A binary file failed structural validation.
    #[error("bad file format: {0}")]
    Format(String),

    #[error("io error")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }
}
