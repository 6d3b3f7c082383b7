use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge on [{a}, {b}]: error estimate {estimate:e}")]
    QuadratureNonConvergence { a: f64, b: f64, estimate: f64 },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("constraints are infeasible: certificate value {certificate:e}")]
    Infeasible { certificate: f64 },
    #[error("SDP solver failed: {0}")]
    Solver(String),
    #[error(transparent)]
    Core(#[from] cvqkd_core::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
