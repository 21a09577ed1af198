//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("label error: {0}")]
    Label(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("dataset error: {0}")]
    Dataset(String),
    #[error("decode error: {0}")]
    Decode(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("model file error: {0}")]
    ModelFile(#[from] ModelFileError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Load/save failures of the binary model container, kept as distinct
/// variants so callers can tell corruption from version skew.
#[derive(Debug, Error)]
pub enum ModelFileError {
    #[error("bad magic (not a model file)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("crc mismatch: stored {stored:#010x}, computed {computed:#010x}")]
    CrcMismatch { stored: u32, computed: u32 },
    #[error("file truncated")]
    Truncated,
    #[error("malformed model file: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
