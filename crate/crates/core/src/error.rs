use thiserror::Error;

/// Failures reported by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("quadrature orderings differ")]
    OrderingMismatch,

    #[error("drift is not Hurwitz (max real part {max_real_part:e})")]
    NotHurwitz { max_real_part: f64 },

    #[error("drift is not Schur stable (spectral radius {spectral_radius:e})")]
    Unstable { spectral_radius: f64 },

    #[error("I - X is singular, displacement cannot be removed (condition {condition:e})")]
    NotGaugeable { condition: f64 },

    #[error("degenerate spectrum: {0}")]
    DegenerateSpectrum(&'static str),

    #[error("series did not converge after {terms} terms")]
    NoConvergence { terms: usize },

    #[error("solver residual {residual:e} exceeds tolerance {tolerance:e}")]
    Inaccurate { residual: f64, tolerance: f64 },

    #[error("not completely positive (margin {margin:e})")]
    NotCompletelyPositive { margin: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate model: {0}")]
    DegenerateModel(&'static str),

    #[error("size {size} exceeds the supported maximum {max}")]
    TooLarge { size: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
