//! Popov triples `Σ = (A, B, Π)`, `Π = [[Q, S], [Sᵀ, R]]`: validation of
//! positivity, the factorization `Π = [C D]ᵀ[C D]`, the Popov function and
//! the orthogonal split of the input space along `ker R`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{input_err, Error, Result};
use crate::linalg::{eig, pinv, CMatrix, Matrix, Subspace, SymEigen};
use crate::Check;

/// Problem data of the LQ problem: dynamics `ẋ = A x + B u` and cost weight
/// `Π = [[Q, S], [Sᵀ, R]]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PopovTriple {
    a: Matrix,
    b: Matrix,
    q: Matrix,
    s: Matrix,
    r: Matrix,
}

/// Symmetry is enforced at this relative level when a triple is built.
const SYMMETRY_TOL: f64 = 1e-10;

impl PopovTriple {
    pub fn new(a: Matrix, b: Matrix, q: Matrix, s: Matrix, r: Matrix) -> Result<Self> {
        let n = a.rows();
        let m = b.cols();
        let shapes = [
            ("A", &a, (n, n)),
            ("B", &b, (n, m)),
            ("Q", &q, (n, n)),
            ("S", &s, (n, m)),
            ("R", &r, (m, m)),
        ];
        for (name, mat, want) in shapes {
            if mat.shape() != want {
                return Err(input_err!(
                    "{} is {}x{}, expected {}x{}",
                    name,
                    mat.rows(),
                    mat.cols(),
                    want.0,
                    want.1
                ));
            }
            mat.ensure_finite(name)?;
        }
        if !q.is_symmetric(SYMMETRY_TOL) {
            return Err(input_err!("Q is not symmetric"));
        }
        if !r.is_symmetric(SYMMETRY_TOL) {
            return Err(input_err!("R is not symmetric"));
        }
        Ok(PopovTriple {
            a,
            b,
            q: q.symmetric_part(),
            s,
            r: r.symmetric_part(),
        })
    }

    /// Triple with cost `‖C x + D u‖²`.
    pub fn from_output(a: Matrix, b: Matrix, c: &Matrix, d: &Matrix) -> Result<Self> {
        if c.rows() != d.rows() {
            return Err(input_err!("C has {} rows but D has {}", c.rows(), d.rows()));
        }
        let ct = c.transpose();
        let q = &ct * c;
        let s = &ct * d;
        let r = &d.transpose() * d;
        PopovTriple::new(a, b, q, s, r)
    }

    pub fn n(&self) -> usize {
        self.a.rows()
    }

    pub fn m(&self) -> usize {
        self.b.cols()
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn q(&self) -> &Matrix {
        &self.q
    }

    pub fn s(&self) -> &Matrix {
        &self.s
    }

    pub fn r(&self) -> &Matrix {
        &self.r
    }

    /// `Π = [[Q, S], [Sᵀ, R]]`
    pub fn pi(&self) -> Matrix {
        Matrix::block2(&self.q, &self.s, &self.s.transpose(), &self.r)
    }

    /// Scale used for relative thresholds: `max(1, ‖Π‖)`.
    pub fn scale(&self) -> f64 {
        self.pi().norm().max(1.0)
    }
}

/// Which of the Schur-complement characterizations of `Π ⪰ 0` hold.
#[derive(Clone, Debug, PartialEq)]
pub struct PopovReport {
    /// `Π ⪰ 0`; defect is `max(0, −λ_min(Π))`.
    pub psd: Check,
    /// `ker R ⊆ ker S`
    pub ker_r_in_ker_s: Check,
    /// `Q − S R† Sᵀ ⪰ 0`
    pub schur_primal_psd: Check,
    /// `ker Q ⊆ ker Sᵀ`
    pub ker_q_in_ker_st: Check,
    /// `R − Sᵀ Q† S ⪰ 0`
    pub schur_dual_psd: Check,
    /// `S R† R = S` and `Sᵀ Q† Q = Sᵀ`
    pub identities: Check,
}

impl PopovReport {
    pub fn all_passed(&self) -> bool {
        [
            self.psd,
            self.ker_r_in_ker_s,
            self.schur_primal_psd,
            self.ker_q_in_ker_st,
            self.schur_dual_psd,
            self.identities,
        ]
        .iter()
        .all(|c| c.passed)
    }
}

fn negativity(m: &Matrix) -> Result<f64> {
    if m.rows() == 0 {
        return Ok(0.0);
    }
    let e = SymEigen::new(m)?;
    Ok((-e.values[0]).max(0.0))
}

/// Evaluates both equivalent triples of conditions for `Π ⪰ 0`.
pub fn check_popov(sigma: &PopovTriple, tol: f64) -> Result<PopovReport> {
    let thr = tol * sigma.scale();
    let (q, s, r) = (sigma.q(), sigma.s(), sigma.r());
    let r_pinv = pinv(r, tol)?;
    let q_pinv = pinv(q, tol)?;
    let ker_r = Subspace::kernel(r, tol)?;
    let ker_q = Subspace::kernel(q, tol)?;
    let st = s.transpose();

    let psd = negativity(&sigma.pi())?;
    let ker_rs = (s * ker_r.basis()).norm();
    let primal = negativity(&(q - &(&(s * &r_pinv) * &st)))?;
    let ker_qs = (&st * ker_q.basis()).norm();
    let dual = negativity(&(r - &(&(&st * &q_pinv) * s)))?;
    let id1 = (&(&(s * &r_pinv) * r) - s).norm();
    let id2 = (&(&(&st * &q_pinv) * q) - &st).norm();

    Ok(PopovReport {
        psd: Check::at_most(psd, thr),
        ker_r_in_ker_s: Check::at_most(ker_rs, thr),
        schur_primal_psd: Check::at_most(primal, thr),
        ker_q_in_ker_st: Check::at_most(ker_qs, thr),
        schur_dual_psd: Check::at_most(dual, thr),
        identities: Check::at_most(id1.max(id2), thr),
    })
}

/// Factor `Π = [C D]ᵀ [C D]` with the minimal number of rows `p = rank Π`.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputFactorization {
    pub c: Matrix,
    pub d: Matrix,
}

impl OutputFactorization {
    pub fn p(&self) -> usize {
        self.c.rows()
    }

    /// `‖CᵀC − Q‖ + ‖CᵀD − S‖ + ‖DᵀD − R‖`
    pub fn reconstruction_defect(&self, sigma: &PopovTriple) -> f64 {
        let ct = self.c.transpose();
        (&(&ct * &self.c) - sigma.q()).norm()
            + (&(&ct * &self.d) - sigma.s()).norm()
            + (&(&self.d.transpose() * &self.d) - sigma.r()).norm()
    }
}

/// Square-root factor `F` with `Fᵀ F = M` for symmetric `M ⪰ 0`, one row per
/// eigenvalue above `tol · λ_max`. Eigenvalues in `[−tol·λ_max, 0)` are
/// treated as zero; anything more negative is a domain error.
pub fn psd_factor(m: &Matrix, tol: f64) -> Result<Matrix> {
    let n = m.rows();
    if n == 0 {
        return Ok(Matrix::zeros(0, 0));
    }
    let e = SymEigen::new(m)?;
    let lmax = e.max_abs();
    let band = tol * lmax;
    if let Some(&low) = e.values.first() {
        if low < -band {
            return Err(Error::Domain(format!(
                "matrix is indefinite: eigenvalue {:e} below -{:e}",
                low, band
            )));
        }
    }
    let keep: Vec<usize> = (0..n).filter(|&i| e.values[i] > band && e.values[i] > 0.0).collect();
    let mut f = Matrix::zeros(keep.len(), n);
    // largest eigenvalue first
    for (row, &i) in keep.iter().rev().enumerate() {
        let sq = libm::sqrt(e.values[i]);
        for j in 0..n {
            f[(row, j)] = sq * e.vectors[(j, i)];
        }
    }
    Ok(f)
}

/// Symmetric square root `M^{1/2}` of `M ⪰ 0`, with the same clamp band as
/// [`psd_factor`].
pub fn psd_sqrt(m: &Matrix, tol: f64) -> Result<Matrix> {
    let f = psd_factor(m, tol)?;
    if f.rows() == 0 {
        return Ok(Matrix::zeros(m.rows(), m.cols()));
    }
    // Fᵀ F = M with F = Λ^{1/2} Vᵀ, so M^{1/2} = V Λ^{1/2} Vᵀ = Fᵀ (F Fᵀ)^{-1/2} F;
    // rows of F are orthogonal with norms √λ.
    let mut out = Matrix::zeros(m.rows(), m.cols());
    for k in 0..f.rows() {
        let row = f.row(k);
        let nrm2: f64 = row.iter().map(|x| x * x).sum();
        let w = 1.0 / libm::sqrt(libm::sqrt(nrm2));
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                out[(i, j)] += row[i] * row[j] * w * w;
            }
        }
    }
    Ok(out)
}

pub fn factor_popov(sigma: &PopovTriple, tol: f64) -> Result<OutputFactorization> {
    let f = psd_factor(&sigma.pi(), tol)?;
    let n = sigma.n();
    Ok(OutputFactorization {
        c: f.columns(0, n),
        d: f.columns(n, sigma.m()),
    })
}

/// Checks that `s` is not a pole of `(sI − A)⁻¹` or `(−sI − Aᵀ)⁻¹`.
pub(crate) fn ensure_not_pole(a: &Matrix, s: Complex64, tol: f64) -> Result<()> {
    let ev = eig(a)?;
    for lam in &ev {
        let guard = tol * (1.0 + lam.norm());
        if (s - lam).norm() <= guard || (s + lam).norm() <= guard {
            return Err(Error::Pole { point: s });
        }
    }
    Ok(())
}

/// `(sI − A)⁻¹ B`
pub(crate) fn resolvent_times(a: &Matrix, b: &Matrix, s: Complex64) -> Result<CMatrix> {
    let m = CMatrix::from_real(&a.scale(-1.0)).add_diag(s);
    m.solve(&CMatrix::from_real(b)).map_err(|_| Error::Pole { point: s })
}

/// `Φ(s) = [Bᵀ(−sI − Aᵀ)⁻¹  I] W [(sI − A)⁻¹B; I]` for a symmetric weight `W`.
fn popov_with_weight(sigma: &PopovTriple, weight: &Matrix, s: Complex64) -> Result<CMatrix> {
    Ok(popov_terms(sigma, weight, s)?.0)
}

/// `Φ(s)` together with `‖left‖·‖Π‖·‖right‖`, the size below which its
/// entries are round-off.
pub(crate) fn popov_with_scale(sigma: &PopovTriple, s: Complex64, tol: f64) -> Result<(CMatrix, f64)> {
    ensure_not_pole(sigma.a(), s, tol)?;
    popov_terms(sigma, &sigma.pi(), s)
}

fn popov_terms(sigma: &PopovTriple, weight: &Matrix, s: Complex64) -> Result<(CMatrix, f64)> {
    let (n, m) = (sigma.n(), sigma.m());
    let right_top = resolvent_times(sigma.a(), sigma.b(), s)?;
    let left_top = resolvent_times(sigma.a(), sigma.b(), -s)?.transpose();
    let mut right = CMatrix::zeros(n + m, m);
    right.set_block(0, 0, &right_top);
    right.set_block(n, 0, &CMatrix::identity(m));
    let mut left = CMatrix::zeros(m, n + m);
    left.set_block(0, 0, &left_top);
    left.set_block(0, n, &CMatrix::identity(m));
    let scale = left.norm() * weight.norm() * right.norm();
    Ok((&(&left * &CMatrix::from_real(weight)) * &right, scale))
}

/// `Π_X = [[Q + AᵀX + XA, S + XB], [(S + XB)ᵀ, R]]`
pub fn pi_x(sigma: &PopovTriple, x: &Matrix) -> Matrix {
    let qx = &(sigma.q() + &(&sigma.a().transpose() * x)) + &(x * sigma.a());
    let sx = sigma.s() + &(x * sigma.b());
    Matrix::block2(&qx, &sx, &sx.transpose(), sigma.r())
}

/// The Popov function at `s`. With `x` given, the value is computed through
/// `Π_X` instead of `Π`; both agree for every symmetric `X`.
pub fn popov_function(
    sigma: &PopovTriple,
    s: Complex64,
    x: Option<&Matrix>,
    tol: f64,
) -> Result<CMatrix> {
    ensure_not_pole(sigma.a(), s, tol)?;
    match x {
        None => popov_with_weight(sigma, &sigma.pi(), s),
        Some(x) => {
            if x.shape() != (sigma.n(), sigma.n()) {
                return Err(input_err!("X must be {}x{}", sigma.n(), sigma.n()));
            }
            if !x.is_symmetric(SYMMETRY_TOL) {
                return Err(input_err!("X is not symmetric"));
            }
            popov_with_weight(sigma, &pi_x(sigma, x), s)
        }
    }
}

/// Orthogonal change of input coordinates `T = [T1 | T2]` with
/// `im T1 = im R` and `im T2 = ker R`.
#[derive(Clone, Debug, PartialEq)]
pub struct InputSplit {
    /// Orthogonal projector onto `ker R`, `G = I − R†R`.
    pub g: Matrix,
    pub t1: Matrix,
    pub t2: Matrix,
    pub b1: Matrix,
    pub b2: Matrix,
    /// `T1ᵀ R T1`, nonsingular of order `m1`.
    pub r0: Matrix,
    pub m1: usize,
    pub m2: usize,
}

impl InputSplit {
    pub fn t(&self) -> Matrix {
        self.t1.hstack(&self.t2)
    }
}

pub fn input_split(sigma: &PopovTriple, tol: f64) -> Result<InputSplit> {
    let m = sigma.m();
    let (t1, t2) = if m == 0 {
        (Matrix::zeros(0, 0), Matrix::zeros(0, 0))
    } else {
        let e = SymEigen::new(sigma.r())?;
        let thr = tol * e.max_abs();
        let range: Vec<usize> = (0..m).rev().filter(|&i| e.values[i] > thr).collect();
        let kernel: Vec<usize> = (0..m).filter(|&i| e.values[i] <= thr).collect();
        let mut t1 = e.vectors.select_columns(&range);
        let mut t2 = e.vectors.select_columns(&kernel);
        normalize_signs(&mut t1);
        normalize_signs(&mut t2);
        (t1, t2)
    };
    let g = &t2 * &t2.transpose();
    let b1 = sigma.b() * &t1;
    let b2 = sigma.b() * &t2;
    let r0 = &(&t1.transpose() * sigma.r()) * &t1;
    Ok(InputSplit {
        m1: t1.cols(),
        m2: t2.cols(),
        g,
        t1,
        t2,
        b1,
        b2,
        r0,
    })
}

/// Flips columns so that the entry of largest magnitude is positive.
pub(crate) fn normalize_signs(m: &mut Matrix) {
    for j in 0..m.cols() {
        let mut best = 0.0f64;
        for i in 0..m.rows() {
            if m[(i, j)].abs() > best.abs() + 1e-12 {
                best = m[(i, j)];
            }
        }
        if best < 0.0 {
            for i in 0..m.rows() {
                m[(i, j)] = -m[(i, j)];
            }
        }
    }
}
