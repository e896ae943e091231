use thiserror::Error;

/// Errors shared by every module in the crate.
///
/// The CLI maps these onto process exit codes: parse failures exit 1,
/// tolerance gates exit 2, resource and I/O problems exit 3.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the documented domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed a declared memory or enumeration budget.
    #[error("resource error: {0}")]
    Resource(String),

    /// An integer value left the 64-bit range.
    #[error("overflow: {0}")]
    Overflow(String),

    /// A descriptor or config fragment failed to parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// Two evaluations of the same spec disagreed.
    #[error("determinism violation: {0}")]
    Determinism(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }
    pub fn overflow(msg: impl Into<String>) -> Self {
        Error::Overflow(msg.into())
    }
    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
