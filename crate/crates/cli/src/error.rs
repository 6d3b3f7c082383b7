use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("key rate problem infeasible: {0}")]
    Infeasible(String),
    #[error("protocol abort: {0}")]
    Abort(String),
    #[error(transparent)]
    Core(#[from] cvqkd_core::Error),
    #[error(transparent)]
    Keyrate(#[from] cvqkd_keyrate::Error),
    #[error(transparent)]
    Postproc(#[from] cvqkd_postproc::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const ABORT: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const AUTH: i32 = 4;
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        use cvqkd_postproc::Error as P;
        match self {
            Self::Abort(_) => exit::ABORT,
            Self::Infeasible(_) | Self::Keyrate(cvqkd_keyrate::Error::Infeasible { .. }) => exit::INFEASIBLE,
            Self::Postproc(P::AuthenticationFailed) => exit::AUTH,
            Self::Postproc(P::Keyrate(cvqkd_keyrate::Error::Infeasible { .. })) => exit::INFEASIBLE,
            Self::Postproc(P::PeerAbort(m)) if m.contains("authentication") => exit::AUTH,
            Self::Postproc(P::PeerAbort(_) | P::Abort(_) | P::Protocol(_) | P::Io(_)) => exit::ABORT,
            _ => exit::FAILURE,
        }
    }
}
