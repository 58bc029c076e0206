use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("domain error in {function}: {detail}")]
    Domain {
        function: &'static str,
        detail: String,
    },

    #[error("mode index {index} out of range 1..={n_modes}")]
    IndexOutOfRange { index: usize, n_modes: usize },

    #[error("invalid parameter `{name}`: {detail}")]
    InvalidParameter { name: &'static str, detail: String },

    #[error("configuration error: {0}")]
    Config(String),

    /// Iterative procedure stopped before reaching its tolerance.
    /// Carries the best available estimate so callers can still report it.
    #[error("no convergence in {context}: best estimate {best} ± {abs_err:e}")]
    Convergence {
        context: &'static str,
        best: f64,
        abs_err: f64,
    },

    #[error("basis dimension {dimension} exceeds budget {budget}")]
    BasisOverflow { dimension: usize, budget: usize },

    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    Eigensolver { residual: f64, iterations: usize },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("power-law fit rejected: residual {residual:e} above {threshold:e}")]
    FitRejected {
        coefficient: f64,
        exponent: f64,
        residual: f64,
        threshold: f64,
    },
}

impl Error {
    pub(crate) fn domain(function: &'static str, detail: impl Into<String>) -> Self {
        Error::Domain {
            function,
            detail: detail.into(),
        }
    }

    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            detail: detail.into(),
        }
    }
}
