use std::io;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),

    /// Malformed vector file.
    #[error("parse error: {0}")]
    Parse(String),

    /// Caller-supplied arguments violate a precondition.
    #[error("parameter error: {0}")]
    Param(String),

    /// Geometry that an estimator cannot handle (coincident points, zero variance).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// Malformed index or profile file.
    #[error("format error: {0}")]
    Format(String),

    #[error("corrupt record for node {node}: {reason}")]
    CorruptNode { node: u64, reason: String },

    #[error("node record needs {record_size} bytes but block_size is {block_size}; use block_size >= {required}")]
    RecordTooLarge {
        record_size: usize,
        block_size: usize,
        required: usize,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}
