use thiserror::Error;

/// Errors raised by constructions, searches and parsers.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("input error: {0}")]
    Input(String),
    #[error("vertex set is not closed under functions (vertex {vertex} escapes)")]
    ClosureViolation { vertex: usize },
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("resource limit exceeded: {what} (cap {cap})")]
    ResourceLimit { what: String, cap: u64 },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}

pub(crate) fn limit(what: impl Into<String>, cap: u64) -> Error {
    Error::ResourceLimit { what: what.into(), cap }
}
