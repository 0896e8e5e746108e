use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("kernel diagonal singularity at r = s = {0} for γ = 2; use the operator with the corrected diagonal")]
    DiagonalSingularity(f64),

    #[error("degenerate direction: D_γ(u,u) = 0")]
    DegenerateDirection,

    #[error("solver did not converge after {iterations} iterations (update {update:.3e}, residual {residual:.3e})")]
    NotConverged {
        iterations: usize,
        update: f64,
        residual: f64,
    },

    #[error("loss of positivity: negative samples clipped {0} times")]
    LostPositivity(usize),

    #[error("critical exponent γ = 2: closed form diverges")]
    CriticalExponent,

    #[error("grid cannot resolve concentration scale: spacing {spacing:.3e} > {limit:.3e}")]
    Unresolved { spacing: f64, limit: f64 },

    #[error("flatness analysis unavailable for tabulated potentials")]
    FlatnessUnavailable,

    #[error("domain exceeded: {0}")]
    DomainExceeded(String),

    #[error("inconsistent sweep: {0}")]
    InconsistentSweep(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
