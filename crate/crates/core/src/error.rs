//! Error type shared by the numerical modules.

use core::fmt;

/// Errors surfaced by matrix factorizations, estimators and samplers.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A Cholesky pivot was non-positive or non-finite: the input is not a
    /// Hermitian positive-definite matrix.
    NotPositiveDefinite,
    /// Two operands that must share a dimension do not.
    DimensionMismatch { expected: usize, got: usize },
    /// A scalar argument lies outside the domain of the operation.
    Domain(&'static str),
    /// The sample does not span the full space, so the (non-regularized)
    /// estimator is undefined.
    RankDeficient,
    /// A requested pre-solve subspace-concentration check failed.
    ConditionViolated(&'static str),
    /// A shape matrix does not satisfy the trace-inverse normalization.
    NormalizationViolated { residual: f64 },
    /// A real-case operation received a matrix with non-negligible
    /// imaginary parts.
    NotReal,
    /// An operation that requires a nonzero vector received a zero vector.
    ZeroVector,
    /// An exact combinatorial check would exceed the configured budget.
    BudgetExceeded { required: u64, budget: u64 },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPositiveDefinite => write!(f, "matrix is not Hermitian positive definite"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::Domain(what) => write!(f, "argument outside domain: {what}"),
            Error::RankDeficient => write!(f, "sample does not span the full space"),
            Error::ConditionViolated(which) => write!(f, "precondition failed: {which}"),
            Error::NormalizationViolated { residual } => {
                write!(f, "trace-inverse normalization violated (residual {residual:e})")
            }
            Error::NotReal => write!(f, "matrix has non-negligible imaginary parts"),
            Error::ZeroVector => write!(f, "zero vector not allowed here"),
            Error::BudgetExceeded { required, budget } => {
                write!(f, "exact check needs {required} subsets, budget is {budget}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

/// Convenience alias.
pub type Result<T> = core::result::Result<T, Error>;
