use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: {0}")]
    NotHermitian(String),

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("{0}")]
    Domain(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("degenerate spike: channel energy must be positive under H1")]
    DegenerateSpike,

    #[error("signal not detectable; cannot estimate SNR (ratio {ratio} <= threshold {threshold})")]
    NotDetectable { ratio: f64, threshold: f64 },

    #[error("infeasible eigenvalue ratio: discriminant {discriminant} < 0")]
    InfeasibleRatio { discriminant: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("sweep error: {0}")]
    Sweep(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
