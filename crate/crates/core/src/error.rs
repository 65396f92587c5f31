//! Error type shared by every module.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure classes. The CLI maps these onto process exit codes.
#[derive(Debug, Error)]
pub enum Error {
    /// Caller supplied arguments that violate an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),
    /// A code, field, or key could not be constructed for the requested parameters.
    #[error("construction error: {0}")]
    Construction(String),
    /// A serialized artifact is malformed or has the wrong magic/version.
    #[error("format error: {0}")]
    Format(String),
    /// Decryption or cipher-level decoding failed.
    #[error("crypto failure: {0}")]
    Crypto(String),
    /// Channel-code decoding failed on a specific column.
    #[error("decode error at column {column}: {kind}")]
    Decode { column: usize, kind: crate::is_channel::DecodeError },
    /// Underlying I/O failure.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }
    pub(crate) fn construction(msg: impl Into<String>) -> Self {
        Error::Construction(msg.into())
    }
    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
    pub(crate) fn crypto(msg: impl Into<String>) -> Self {
        Error::Crypto(msg.into())
    }
}
