//! Dense real/complex matrix kernel.
//!
//! Small-matrix routines only (orders up to a few hundred): one-sided Jacobi
//! SVD for every rank decision, Jacobi for symmetric eigenproblems, Francis
//! double-shift QR for the real Schur form, Bartels–Stewart for Sylvester
//! equations and Padé scaling-and-squaring for the exponential.

mod cmatrix;
mod expm;
mod lu;
mod matrix;
pub mod qr;
mod schur;
mod spectrum;
mod subspace;
mod svd;
mod sylvester;
mod symeig;

pub use cmatrix::CMatrix;
pub use expm::expm;
pub use lu::Lu;
pub use matrix::Matrix;
pub use num_complex::Complex64;
pub use schur::{eig, hessenberg, RealSchur};
pub use spectrum::Spectrum;
pub use subspace::{subspace_ops, Subspace, SubspaceRelations};
pub use svd::{pinv, rank, rank_factor, RankFactor, Svd};
pub use sylvester::{solve_lyapunov, solve_sylvester};
pub use symeig::SymEigen;

use crate::error::Result;

/// Rank of a complex matrix, through its real embedding.
pub fn complex_rank(m: &CMatrix, tol: f64) -> Result<usize> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0);
    }
    let svd = Svd::new(&m.real_embedding())?;
    // singular values come in equal pairs; the threshold uses the complex
    // matrix's own dimensions
    let thr = svd::rank_threshold(svd.max(), m.rows().max(m.cols()), tol);
    let r = svd.s.iter().take_while(|&&x| x > thr).count();
    Ok(r.div_ceil(2))
}

/// Rank of a complex matrix whose entries are sums of terms of size `scale`:
/// singular values below `tol · scale` count as zero even when the matrix
/// itself is tiny.
pub fn complex_rank_scaled(m: &CMatrix, scale: f64, tol: f64) -> Result<usize> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(0);
    }
    let svd = Svd::new(&m.real_embedding())?;
    let thr = svd::rank_threshold(svd.max().max(scale), m.rows().max(m.cols()), tol);
    let r = svd.s.iter().take_while(|&&x| x > thr).count();
    Ok(r.div_ceil(2))
}

/// Singular values of a complex matrix (one copy of each pair).
pub fn complex_singular_values(m: &CMatrix) -> Result<alloc::vec::Vec<f64>> {
    let svd = Svd::new(&m.real_embedding())?;
    Ok(svd.s.iter().step_by(2).copied().collect())
}

/// Largest absolute deviation of `Mᵀ M` from the identity.
pub fn orthonormality_defect(m: &Matrix) -> f64 {
    (&m.transpose() * m).max_diff(&Matrix::identity(m.cols()))
}
