use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("cholesky failed at maximal jitter {jitter:e}")]
    CholeskyFailed { jitter: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureDivergence(String),

    #[error("negative quadratic form {0:e} (covariance is not positive semidefinite)")]
    NegativeQuadraticForm(f64),

    #[error("spectral density underflow at lambda = {0}")]
    SpectralUnderflow(f64),

    #[error("no construction reaches sup-error <= {0}")]
    Infeasible(f64),

    #[error("missing derivatives: need {needed}, got {got}")]
    MissingDerivatives { needed: usize, got: usize },

    #[error("mcmc chain never accepted after adaptation (beta = {0})")]
    ZeroAcceptance(f64),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("mixed prior families in one fit")]
    MixedFamilies,

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
