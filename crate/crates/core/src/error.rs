use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;

pub type Result<T> = core::result::Result<T, Error>;

/// Failure modes of the numerical routines.
///
/// Conditions that are a *result* of an analysis (a candidate that fails
/// verification, an unbounded cost) are reported in return values instead.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Malformed input: wrong shapes, non-finite entries, asymmetric weights.
    #[error("invalid input: {0}")]
    Input(String),

    #[error("iteration failed to converge in {routine} after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },

    /// `A X + X B + C = 0` has no unique solution.
    #[error("Sylvester operator is singular: eigenvalue {eigenvalue} of A meets -σ(B)")]
    SingularSylvester { eigenvalue: Complex64 },

    /// A mathematical precondition does not hold (indefinite Π, subspace not
    /// output-nulling, unreachable pair, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Evaluation point on a pole of a rational matrix.
    #[error("evaluation point {point} is a pole (eigenvalue of A or -Aᵀ)")]
    Pole { point: Complex64 },

    #[error("unsupported instance: {0}")]
    Unsupported(String),

    /// No CGCARE solution exists for the given data.
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("reduced Hamiltonian has eigenvalues on the imaginary axis: {eigenvalues:?}")]
    NoStabilizingSolution { eigenvalues: Vec<Complex64> },

    /// Two independent computations of the same object disagree.
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
}

macro_rules! input_err {
    ($($arg:tt)*) => {
        $crate::error::Error::Input(alloc::format!($($arg)*))
    };
}

pub(crate) use input_err;
