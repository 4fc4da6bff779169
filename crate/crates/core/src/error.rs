use num_complex::Complex64;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pole of the Gamma function at z = {0}")]
    Pole(Complex64),

    #[error("overflow while evaluating {0}")]
    Overflow(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("wrong matrix kind: expected {expected}, got {got}")]
    WrongKind {
        expected: &'static str,
        got: &'static str,
    },

    /// No sign change of the admissibility residual below the bracket ceiling.
    #[error("no admissible root for k = {k} with omega <= {omega_max}")]
    NoRoot { k: usize, omega_max: f64 },

    #[error("iteration did not converge after {iterations} steps (last delta {delta:e})")]
    NonConvergence { iterations: usize, delta: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("eigendecomposition failed: {0}")]
    Eigen(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

pub(crate) fn check_n(n: usize) -> Result<()> {
    if n >= 2 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")))
    }
}
