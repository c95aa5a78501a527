use thiserror::Error;

/// Errors produced by the geophase library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode count must be at least 1")]
    ZeroModes,

    #[error("expected a square matrix of even dimension, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("matrix is not symplectic: residual {residual:e} exceeds tolerance {tolerance:e}")]
    NotSymplectic { residual: f64, tolerance: f64 },

    #[error("matrix is not symmetric: asymmetry {residual:e} exceeds tolerance {tolerance:e}")]
    NotSymmetric { residual: f64, tolerance: f64 },

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("invalid oscillator parameters: {0}")]
    InvalidParams(String),

    #[error("eigenvalue gap {gap:e} is below the degeneracy threshold {threshold:e}")]
    DegenerateEigenvalues { gap: f64, threshold: f64 },

    #[error("closed-form coefficient has imaginary residue {residue:e}")]
    ImaginaryResidue { residue: f64 },

    #[error("upper-right block is singular (det B = {det:e})")]
    SingularB { det: f64 },

    #[error("invalid quadrature grid: {0}")]
    InvalidGrid(String),

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("integrand is not finite at t = {t}")]
    NonFiniteIntegrand { t: f64 },

    #[error(
        "quadrature budget exhausted after {evaluations} evaluations \
         (estimate {value}, error {error_estimate:e})"
    )]
    BudgetExhausted {
        value: f64,
        error_estimate: f64,
        evaluations: usize,
    },

    #[error("path is not of lower block-triangular form: {0}")]
    NotBZeroForm(String),
}

pub type Result<T> = std::result::Result<T, Error>;
