use std::io;

/// Errors produced by pattern construction, ordering, simulation and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A matrix or level would exceed the configured entry budget.
    #[error("resource limit exceeded: {requested} entries requested, limit is {limit}")]
    Resource { requested: u128, limit: u64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("index {index} out of range 1..={len}")]
    Index { index: usize, len: usize },

    /// A caller violated a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// An internal cross-check failed. Reaching this is a bug.
    #[error("internal inconsistency: {0}")]
    Inconsistency(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn inconsistency(msg: impl Into<String>) -> Self {
        Error::Inconsistency(msg.into())
    }

    pub(crate) fn format(offset: u64, msg: impl Into<String>) -> Self {
        Error::Format {
            offset,
            message: msg.into(),
        }
    }
}
