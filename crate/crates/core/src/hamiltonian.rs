//! The Hamiltonian system of a Popov triple, the closed-loop pencil `P̂(s)`
//! attached to a solution, its block decomposition along `R0,X`, and the
//! invariant zeros.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::cgcare::{derived_matrices, require_cgcare};
use crate::error::{input_err, Error, Result};
use crate::geometry::r0x;
use crate::linalg::{complex_rank, eig, CMatrix, Matrix, Spectrum};
use crate::popov::{input_split, PopovTriple};
use crate::sample::sample_points;
use crate::Settings;

/// State `[x; λ]` with costate `λ`:
/// `Â = [[A, 0], [−Q, −Aᵀ]]`, `B̂ = [B; −S]`, `Ĉ = [Sᵀ Bᵀ]`, `D̂ = R`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianSystem {
    pub a_hat: Matrix,
    pub b_hat: Matrix,
    pub c_hat: Matrix,
    pub d_hat: Matrix,
}

impl HamiltonianSystem {
    pub fn rosenbrock(&self, s: Complex64) -> CMatrix {
        rosenbrock_matrix(&self.a_hat, &self.b_hat, &self.c_hat, &self.d_hat, s)
    }

    pub fn rank_at(&self, s: Complex64, tol: f64) -> Result<usize> {
        complex_rank(&self.rosenbrock(s), tol)
    }
}

pub fn build_hamiltonian(sigma: &PopovTriple) -> HamiltonianSystem {
    let n = sigma.n();
    let (a, b, q, s) = (sigma.a(), sigma.b(), sigma.q(), sigma.s());
    HamiltonianSystem {
        a_hat: Matrix::block2(a, &Matrix::zeros(n, n), &(-q), &(-&a.transpose())),
        b_hat: b.vstack(&(-s)),
        c_hat: s.transpose().hstack(&b.transpose()),
        d_hat: sigma.r().clone(),
    }
}

/// `[[A − sI, B], [C, D]]`
pub fn rosenbrock_matrix(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, s: Complex64) -> CMatrix {
    let n = a.rows();
    let (p, m) = d.shape();
    let mut out = CMatrix::zeros(n + p, n + m);
    out.set_block(0, 0, &CMatrix::from_real(a).add_diag(-s));
    out.set_block(0, n, &CMatrix::from_real(b));
    out.set_block(n, 0, &CMatrix::from_real(c));
    out.set_block(n, n, &CMatrix::from_real(d));
    out
}

pub fn rosenbrock_rank(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, s: Complex64, tol: f64) -> Result<usize> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n || c.cols() != n || d.rows() != c.rows() || d.cols() != b.cols() {
        return Err(input_err!("inconsistent quadruple for the Rosenbrock matrix"));
    }
    complex_rank(&rosenbrock_matrix(a, b, c, d, s), tol)
}

fn closed_loop_pencil(a_x: &Matrix, b: &Matrix, r: &Matrix, s: Complex64) -> CMatrix {
    let n = a_x.rows();
    let m = b.cols();
    let mut p = CMatrix::zeros(2 * n + m, 2 * n + m);
    p.set_block(0, 0, &CMatrix::from_real(a_x).add_diag(-s));
    p.set_block(0, 2 * n, &CMatrix::from_real(b));
    p.set_block(n, n, &CMatrix::from_real(&(-&a_x.transpose())).add_diag(-s));
    p.set_block(2 * n, n, &CMatrix::from_real(&b.transpose()));
    p.set_block(2 * n, 2 * n, &CMatrix::from_real(r));
    p
}

/// `P̂(s) = [[A_X − sI, 0, B], [0, −(A_Xᵀ + sI), 0], [0, Bᵀ, R]]`.
pub fn hamiltonian_pencil(sigma: &PopovTriple, x: &Matrix, s: Complex64, tol: f64) -> Result<CMatrix> {
    require_cgcare(sigma, x, tol)?;
    let dm = derived_matrices(sigma, x, tol)?;
    Ok(closed_loop_pencil(&dm.a_x, sigma.b(), sigma.r(), s))
}

/// `P̂(s)` in coordinates adapted to `R0,X` and to the split `ker R ⊕ im R`.
///
/// With `H = [U1 U2]` orthogonal, `im U1 = R0,X`, and `T = [T1 T2]`:
/// `Hᵀ A_X H = [[a11, a12], [0, gamma]]`,
/// `Hᵀ B T = [[b11, b21], [b12, 0]]`.
#[derive(Clone, Debug)]
pub struct PencilDecomposition {
    pub r: usize,
    pub m1: usize,
    pub m2: usize,
    pub a11: Matrix,
    pub a12: Matrix,
    /// `Γ_X`, the map induced by `A_X` on the quotient modulo `R0,X`.
    pub gamma: Matrix,
    /// `U1ᵀ B T1`
    pub b11: Matrix,
    /// `U2ᵀ B T1`
    pub b12: Matrix,
    /// `U1ᵀ B T2`; `(a11, b21)` is reachable.
    pub b21: Matrix,
    /// `T1ᵀ R T1`, nonsingular.
    pub r0block: Matrix,
    pub normal_rank: usize,
    pub finite_zeros: Spectrum,
    /// The pencil's eigenvalue at infinity has this multiplicity.
    pub infinite_multiplicity: usize,
    pub h: Matrix,
    pub t: Matrix,
}

pub fn pencil_decompose(sigma: &PopovTriple, x: &Matrix, tol: f64) -> Result<PencilDecomposition> {
    let dm = derived_matrices(sigma, x, tol)?;
    let r0 = r0x(sigma, x, tol)?;
    let split = input_split(sigma, tol)?;
    let n = sigma.n();
    let r = r0.dim();
    let h = r0.basis().hstack(r0.complement().basis());
    let ah = &(&h.transpose() * &dm.a_x) * &h;
    let bt = &(&h.transpose() * sigma.b()) * &split.t();
    let gamma = ah.submatrix(r, r, n - r, n - r);
    let m1 = split.m1;
    let finite_zeros = eig(&gamma)?.mirrored();
    Ok(PencilDecomposition {
        r,
        m1,
        m2: split.m2,
        a11: ah.submatrix(0, 0, r, r),
        a12: ah.submatrix(0, r, r, n - r),
        b11: bt.submatrix(0, 0, r, m1),
        b12: bt.submatrix(r, 0, n - r, m1),
        b21: bt.submatrix(0, m1, r, split.m2),
        gamma,
        r0block: split.r0.clone(),
        normal_rank: 2 * n + m1,
        finite_zeros,
        infinite_multiplicity: m1,
        t: split.t(),
        h,
    })
}

/// Rank of `P̂(s)` at one point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankSample {
    pub s: Complex64,
    pub rank: usize,
}

pub fn rank_scan(sigma: &PopovTriple, x: &Matrix, points: &[Complex64], tol: f64) -> Result<Vec<RankSample>> {
    require_cgcare(sigma, x, tol)?;
    let dm = derived_matrices(sigma, x, tol)?;
    points
        .iter()
        .map(|&s| {
            let rank = complex_rank(&closed_loop_pencil(&dm.a_x, sigma.b(), sigma.r(), s), tol)?;
            Ok(RankSample { s, rank })
        })
        .collect()
}

/// Relative size of the largest step used to confirm that a rank drop is
/// isolated. Smaller steps (down by factors of √10) are tried only when a
/// neighbouring zero is in the way.
pub const DROP_PROBE: f64 = 1e-1;

/// `σ(Γ_X) ∪ σ(−Γ_X)`, cross-checked against the rank of `P̂`: it must drop
/// at every zero, recover a short step away from it, and be full at seeded
/// generic points.
pub fn invariant_zeros(sigma: &PopovTriple, x: &Matrix, settings: Settings) -> Result<Spectrum> {
    let tol = settings.tol;
    let dec = pencil_decompose(sigma, x, tol)?;
    let dm = derived_matrices(sigma, x, tol)?;
    let pencil = |s: Complex64| closed_loop_pencil(&dm.a_x, sigma.b(), sigma.r(), s);
    let zeros = &dec.finite_zeros;
    let nr = dec.normal_rank;
    let min_gap = |s: Complex64| zeros.iter().map(|z| (z - s).norm()).fold(f64::INFINITY, f64::min);

    for z in zeros {
        let centre = complex_rank(&pencil(*z), tol)?;
        if centre >= nr {
            return Err(Error::Inconsistent(format!(
                "rank of the pencil does not drop at the zero {} (rank {}, normal rank {})",
                z, centre, nr
            )));
        }
        let probe = (0..4)
            .flat_map(|j| {
                let delta = DROP_PROBE * (1.0 + z.norm()) * libm::pow(10.0, -0.5 * j as f64);
                (0..8).map(move |k| {
                    let p = *z + Complex64::from_polar(delta, 0.3 + k as f64 * core::f64::consts::FRAC_PI_4);
                    (p, delta)
                })
            })
            .find(|(p, delta)| min_gap(*p) > 0.5 * delta)
            .map(|(p, _)| p);
        if let Some(p) = probe {
            let off = complex_rank(&pencil(p), tol)?;
            if off != nr {
                return Err(Error::Inconsistent(format!(
                    "rank {} near the zero {} differs from the normal rank {}",
                    off, z, nr
                )));
            }
        }
    }
    let avoid: Vec<Complex64> = zeros.iter().copied().collect();
    for s in sample_points(settings.seed, 5, &avoid, 0.05) {
        let rk = complex_rank(&pencil(s), tol)?;
        if rk != nr {
            return Err(Error::Inconsistent(format!(
                "rank {} at the generic point {} differs from the normal rank {}",
                rk, s, nr
            )));
        }
    }
    Ok(dec.finite_zeros)
}
