use std::path::PathBuf;

/// Why the contents of an input could not be used.
#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Schema(String),
}

impl FormatError {
    pub(crate) fn schema(msg: impl Into<String>) -> Self {
        FormatError::Schema(msg.into())
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{0}")]
    Usage(String),
}

impl Error {
    pub(crate) fn format(path: &std::path::Path, source: FormatError) -> Self {
        Error::Format {
            path: path.to_path_buf(),
            source,
        }
    }
}
