//! Error type shared across the library.

/// Errors reported by library operations.
///
/// The CLI maps these onto process exit codes: configuration and shape
/// problems are usage errors, [`Error::NumericalDegeneracy`] signals that an
/// otherwise well-posed computation lost too much precision to be trusted,
/// and [`Error::NodeBudgetExceeded`] means a quadrature request was refused
/// before evaluation started.
#[derive(thiserror::Error, Debug, Clone)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max asymmetry {max_asymmetry:.3e} exceeds tolerance {tol:.3e}")]
    NotHermitian { max_asymmetry: f64, tol: f64 },

    #[error("form is not real: max deviation {max_deviation:.3e} exceeds tolerance {tol:.3e}")]
    NotReal { max_deviation: f64, tol: f64 },

    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },

    #[error("twist mismatch: expected {expected}, got {got}")]
    TwistMismatch { expected: i32, got: i32 },

    #[error("wedge degree {0} exceeds the ambient dimension {1}")]
    DegreeOverflow(usize, usize),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("quadrature node budget exceeded: {requested} nodes requested, cap is {cap}")]
    NodeBudgetExceeded { requested: u128, cap: u128 },

    #[error("field backend does not support {0}")]
    UnsupportedBackend(&'static str),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T> = std::result::Result<T, Error>;
