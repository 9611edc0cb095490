//! Numerical core for singular linear-quadratic control problems.
//!
//! The crate verifies solutions of the constrained generalized continuous
//! algebraic Riccati equation (CGCARE)
//!
//! ```text
//! X A + Aᵀ X − (S + X B) R† (Sᵀ + Bᵀ X) + Q = 0,   ker R ⊆ ker (S + X B)
//! ```
//!
//! and computes the geometric objects attached to a solution: the
//! X-independent reachable subspace `R0,X` of `(A_X, B G)`, output-nulling
//! subspaces, the invariant zeros of the Hamiltonian system, and a feedback
//! that assigns the closed-loop eigenvalues on `R0,X` without changing the cost.
//!
//! Everything here is `no_std` + `alloc` and side-effect free; file formats
//! and the command line front end live in the `riccati-geom` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cgcare;
pub mod error;
pub mod geometry;
pub mod hamiltonian;
pub mod linalg;
pub mod popov;
pub mod sample;
pub mod sim;
pub mod stabilize;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Complex64, Matrix, Spectrum, Subspace};
pub use popov::PopovTriple;

/// Default relative tolerance for rank decisions and identity checks.
pub const DEFAULT_TOL: f64 = 1e-8;

/// Default seed for every randomized choice (sample points, input mixing).
pub const DEFAULT_SEED: u64 = 0x81CC;

/// Tolerance and seed shared by the analysis routines.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub seed: u64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: DEFAULT_TOL,
            seed: DEFAULT_SEED,
        }
    }
}

impl Settings {
    pub fn with_tol(tol: f64) -> Self {
        Settings {
            tol,
            ..Settings::default()
        }
    }
}

/// Outcome of one numerical check: the measured defect and the threshold it
/// was compared against.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Check {
    pub passed: bool,
    pub defect: f64,
    pub threshold: f64,
}

impl Check {
    /// Passes when `defect <= threshold`.
    pub fn at_most(defect: f64, threshold: f64) -> Self {
        Check {
            passed: defect <= threshold,
            defect,
            threshold,
        }
    }

    /// A yes/no outcome that carries a supporting measurement.
    pub fn flag(passed: bool, defect: f64, threshold: f64) -> Self {
        Check {
            passed,
            defect,
            threshold,
        }
    }
}
