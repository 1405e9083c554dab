use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian within tolerance (residual {residual:.3e}, tol {tol:.3e})")]
    NotHermitian { residual: f64, tol: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("near-singular operator: {0}")]
    Singular(String),
    #[error("problem reported infeasible{0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
