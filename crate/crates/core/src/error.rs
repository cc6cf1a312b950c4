use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("matrix is not nonnegative definite (smallest eigenvalue {min_eigenvalue:e}, tolerance {tolerance:e})")]
    NotNonnegativeDefinite { min_eigenvalue: f64, tolerance: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_diagonal:e})")]
    EigenNoConvergence { sweeps: usize, off_diagonal: f64 },

    #[error("adaptive quadrature stopped at estimate {estimate:e} with error bound {error:e} above tolerance {tolerance:e}")]
    QuadratureFailed {
        estimate: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("fixed-point iteration did not converge after {iterations} iterations (residual {residual:e})")]
    FixedPointNoConvergence { iterations: usize, residual: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for errors signalling that an iterative numerical method gave up.
    pub fn is_non_convergence(&self) -> bool {
        matches!(
            self,
            Error::EigenNoConvergence { .. }
                | Error::QuadratureFailed { .. }
                | Error::FixedPointNoConvergence { .. }
        )
    }
}
