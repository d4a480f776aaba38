use std::path::PathBuf;

/// Errors from configuration, file formats and the pipelines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration or command-line usage.
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    /// A malformed or inconsistent artifact file.
    #[error("format error: {0}")]
    Format(String),
    #[error(transparent)]
    Core(#[from] sphmean_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Process exit code: 4 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Core(sphmean_core::Error::Argument(_)) => 1,
            Error::Core(_) => 4,
            _ => 1,
        }
    }
}
