use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors surfaced by the inspection toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("pnm decode error at byte {offset}: {reason}")]
    Pnm { offset: usize, reason: String },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("unknown kernel `{0}` (expected sobel_x, sobel_y, laplacian or sharpen)")]
    UnknownKernel(String),

    #[error("invalid gaussian spec: {0}")]
    InvalidGaussian(String),

    #[error("invalid gear spec: {0}")]
    InvalidGear(String),

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("{path}: {reason}")]
    BadFile { path: PathBuf, reason: String },

    #[error("manifest line {line}: {reason}")]
    Manifest { line: usize, reason: String },

    #[error("model line {line}: {reason}")]
    Model { line: usize, reason: String },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
