//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse state descriptor `{0}`: {1}")]
    DescriptorParse(String, String),

    #[error("expected a {expected}-mode state, got {got} modes")]
    ModeMismatch { expected: usize, got: usize },

    #[error("cutoff mismatch: {0} vs {1}")]
    CutoffMismatch(usize, usize),

    #[error("Fock level {n} is outside the truncated basis (cutoff {cutoff})")]
    FockOutOfRange { n: usize, cutoff: usize },

    #[error("cutoff must be at least 2, got {0}")]
    CutoffTooSmall(usize),

    #[error("mean photon number must be non-negative, got {0}")]
    NegativeOccupation(f64),

    #[error("unphysical Gaussian parameters: {0}")]
    UnphysicalGaussian(String),

    #[error("conditioning on a null event: outcome probability {0:.3e} below 1e-14")]
    NullProjection(f64),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("trivial beam splitter (r·t = 0): θ = {0} is excluded, only mixing angles with t ≠ 0 and r ≠ 0 are meaningful")]
    TrivialBeamSplitter(f64),

    #[error("exponent series norm cap exceeded: ℓ₁ mass {mass:.3e} > cap {cap:.3e}")]
    NormCapExceeded { mass: f64, cap: f64 },

    #[error("tensor dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),

    #[error("series order mismatch: {0} vs {1}")]
    OrderMismatch(usize, usize),

    #[error("truncation tail mass {mass:.3e} exceeds the allowed {limit:.3e}")]
    TailMass { mass: f64, limit: f64 },

    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),

    #[error("degenerate denominator τ² − 4|μ|² = {0:.3e}")]
    DegenerateDenominator(f64),

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Linalg { routine: &'static str, info: i32 },

    #[error("malformed exponent series document: {0}")]
    SeriesFormat(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
