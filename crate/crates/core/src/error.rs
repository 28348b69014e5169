use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("duplicate detection for track {track_id} in frame {frame}")]
    DuplicateTrack { frame: u32, track_id: u64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("scene script error: {0}")]
    Script(String),

    #[error("training failed at cell size {cell_size}: {source}")]
    Fit {
        cell_size: u32,
        #[source]
        source: gridvad_bn::BnError,
    },

    #[error(transparent)]
    Network(#[from] gridvad_bn::BnError),

    #[error("invalid model bundle: {0}")]
    Bundle(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
