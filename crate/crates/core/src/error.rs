use std::path::PathBuf;

/// Failure modes shared by every stage of the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("ions {0} and {1} coincide")]
    CoincidentIons(usize, usize),

    #[error("configuration is not strictly ordered at index {0}")]
    Unordered(usize),

    #[error("solver did not converge after {iterations} iterations (gradient norm {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },

    #[error("equilibrium is a saddle point (lowest curvature {0:e})")]
    Saddle(f64),

    #[error("unstable equilibrium: Hessian eigenvalue {0:e} is not positive")]
    UnstableEquilibrium(f64),

    #[error("drift matrix is unstable: max Re(lambda) = {0:e}")]
    Instability(f64),

    #[error("ill-conditioned eigenbasis: |lambda_g + lambda_e| = {0:e}")]
    Conditioning(f64),

    #[error("unphysical covariance: {0}")]
    Unphysical(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
