use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Nav(#[from] tentacle_nav::Error),
}

impl BenchError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        BenchError::Io { path: path.to_path_buf(), source }
    }

    /// Process exit code: 1 usage or parse, 2 validation, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        use tentacle_nav::Error as E;
        match self {
            BenchError::Usage(_) | BenchError::Parse(_) => 1,
            BenchError::Validation(_) => 2,
            BenchError::Io { .. } => 3,
            BenchError::Nav(e) => match e {
                E::InvalidParameter { .. } | E::Generation(_) | E::Allocation { .. } => 2,
                E::MapFormat(_) => 1,
                E::Io(_) => 3,
            },
        }
    }
}
