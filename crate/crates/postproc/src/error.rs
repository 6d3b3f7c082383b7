use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("unresolved block {0} in ledger")]
    UnresolvedBlock(usize),
    #[error("malformed message: {0}")]
    Protocol(String),
    #[error("peer aborted: {0}")]
    PeerAbort(String),
    #[error("authentication tag mismatch")]
    AuthenticationFailed,
    #[error("protocol abort: {0}")]
    Abort(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Core(#[from] cvqkd_core::Error),
    #[error(transparent)]
    Keyrate(#[from] cvqkd_keyrate::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn expect_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
