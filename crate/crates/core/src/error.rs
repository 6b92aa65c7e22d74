use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty database")]
    EmptyDatabase,

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown event id {0}")]
    UnknownEvent(u32),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("event {0} has zero support and cannot be encoded")]
    ZeroSupport(u32),

    #[error("code length undefined for a code with zero usage")]
    ZeroUsage,

    #[error("invalid cover: {0}")]
    InvalidCover(String),

    #[error("truncated stream")]
    TruncatedStream,

    #[error("malformed stream: {0}")]
    MalformedStream(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
