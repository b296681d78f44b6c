use std::path::PathBuf;

/// Errors surfaced by the projection pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A binary or text input does not match its on-disk format.
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },

    /// Invalid configuration value or combination.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Inputs that must agree in shape or length do not.
    #[error("structural mismatch: {0}")]
    Structure(String),

    /// Scan unfolding recovered more scanlines than the image has rows.
    #[error("scan unfolding found {rings} scanlines but image height is {height}")]
    Unfolding { rings: usize, height: usize },

    /// A selection policy was invoked without an input it depends on.
    #[error("selection policy requires {0}")]
    MissingPolicyInput(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
