use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("zone vertex {vertex} lies behind the camera plane (depth {depth:.3} m)")]
    BehindCamera { vertex: usize, depth: f64 },

    #[error("object {id}: {source}")]
    Object {
        id: String,
        #[source]
        source: Box<Error>,
    },

    #[error("scenario generation failed for seed {seed}: {reason}")]
    Generation { seed: u64, reason: String },

    #[error("config: {0}")]
    Config(String),

    #[error("dataset format version {found:?} is not supported (expected {expected:?})")]
    VersionMismatch { found: String, expected: String },

    #[error("{path}:{line}: malformed record: {reason}")]
    MalformedRecord {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("manifest declares {declared} frames but {found} records were read")]
    FrameCountMismatch { declared: usize, found: usize },

    #[error("dataset directory {0} is locked by another writer")]
    Locked(PathBuf),

    #[error("detection {index} references unknown frame {frame}")]
    UnknownFrame { index: usize, frame: u64 },

    #[error("frame index {index} out of range (dataset has {count} frames)")]
    FrameOutOfRange { index: u64, count: usize },

    #[error("split: {0}")]
    Split(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn for_object(self, id: &str) -> Self {
        Error::Object {
            id: id.to_string(),
            source: Box::new(self),
        }
    }
}
