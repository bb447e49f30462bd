use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A value lies outside the representable range of a `bits`-bit two's
    /// complement integer.
    #[error("value {value} out of range for {bits}-bit integers{}", index.map(|i| format!(" (at index {i})")).unwrap_or_default())]
    OutOfRange {
        value: i64,
        bits: u32,
        index: Option<usize>,
    },

    #[error("corrupt blob: {0}")]
    CorruptBlob(String),

    #[error("parse error at {context}: {message}")]
    Parse { context: String, message: String },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
