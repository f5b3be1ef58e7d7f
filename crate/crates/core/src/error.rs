use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A sample was non-finite or outside its admissible range.
    #[error("sample {index} has value {value}, outside the admissible domain {domain}")]
    Domain {
        index: usize,
        value: f64,
        domain: &'static str,
    },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid transform: {0}")]
    InvalidTransform(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("degenerate scene: {0}")]
    DegenerateScene(String),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("region selects no pixels")]
    EmptyRegion,
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: malformed file: {message}", path.display())]
    Malformed { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn malformed(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Malformed {
            path: path.into(),
            message: message.into(),
        }
    }
}
