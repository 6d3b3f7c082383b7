use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("size mismatch: expected {expected}, got {actual}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("frame synchronization failed: peak correlation {peak:.3} below floor {floor:.3}")]
    SyncFailure { peak: f64, floor: f64 },
    #[error("shot-noise calibration failed: {0}")]
    Calibration(String),
    #[error("empty symbol class {0}")]
    EmptySymbolClass(usize),
    #[error("observable key mismatch: {0}")]
    KeyMismatch(String),
    #[error("malformed record stream: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
