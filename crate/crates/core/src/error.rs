//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("lambda = {0} is outside the sector (|arg| must be < pi - theta, lambda != 0)")]
    OutsideSector(num_complex::Complex64),

    #[error("principal square root of zero requested")]
    SqrtOfZero,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("divergence data must have zero mean (|mean| = {0:.3e})")]
    NonzeroMean(f64),

    #[error("divergence data has content {0:.3e} on modes where sampled first derivatives vanish")]
    UnresolvableDivergence(f64),

    #[error("odd extension ill-posed: boundary samples reach {0:.3e} of the component scale")]
    OddExtensionBoundary(f64),

    #[error("Lipschitz constant {lip:.3} exceeds the contraction guard {limit}")]
    LipschitzTooLarge { lip: f64, limit: f64 },

    #[error("remainder iteration diverged: update ratios grew for {steps} consecutive steps (estimated rho = {rho:.3})")]
    IterationDiverged { steps: usize, rho: f64 },

    #[error("remainder iteration hit max_iter = {max_iter} (last relative update {last:.3e}, tol {tol:.3e})")]
    IterationStalled { max_iter: usize, last: f64, tol: f64 },

    #[error("field is not divergence-free (relative divergence {0:.3e}); pass project = true to project")]
    NotDivergenceFree(f64),

    #[error("config error: {0}")]
    Config(String),

    #[error("dump format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
