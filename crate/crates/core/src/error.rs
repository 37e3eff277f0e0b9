use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },

    #[error("truncated pixel data: expected {expected} samples, found {found}")]
    Truncated { expected: usize, found: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no foreground component")]
    NoComponent,

    #[error("degenerate mask: {0}")]
    DegenerateMask(String),

    #[error("odd-length input ({0}) where an even length is required")]
    OddLength(usize),

    #[error("size error: {0}")]
    Size(String),

    #[error("rank error: requested {requested} components from {available} available")]
    Rank { requested: usize, available: usize },

    #[error("label {0} has no output unit in the class map")]
    Label(u32),

    #[error("manifest error: {0}")]
    Manifest(String),

    #[error("model format error: {0}")]
    Format(String),

    #[error("failed to preprocess {path}: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn size(message: impl Into<String>) -> Self {
        Error::Size(message.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
