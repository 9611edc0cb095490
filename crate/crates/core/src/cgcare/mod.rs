//! The constrained generalized continuous algebraic Riccati equation
//!
//! ```text
//! X A + Aᵀ X − (S + X B) R† (Sᵀ + Bᵀ X) + Q = 0,    ker R ⊆ ker (S + X B)
//! ```
//!
//! residuals, verification of candidates, the closed-loop matrices attached
//! to a solution, the spectral factor of the Popov function, and a solver
//! that reduces the problem to a regular CARE on a quotient space.

mod reduced;

pub use reduced::solve_reduced;

use alloc::format;

use num_complex::Complex64;

use crate::error::{input_err, Error, Result};
use crate::linalg::{complex_rank_scaled, pinv, CMatrix, Matrix};
use crate::popov::{
    ensure_not_pole, factor_popov, input_split, popov_with_scale, psd_sqrt, resolvent_times,
    OutputFactorization, PopovTriple,
};
use crate::sample::sample_points;
use crate::Settings;

/// Verification status of a candidate `X`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Unchecked,
    /// Solves the Riccati equation but violates the kernel constraint.
    GcareOnly,
    /// Solves the constrained equation.
    Cgcare,
    Failed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSolution {
    pub x: Matrix,
    pub status: Status,
    /// ‖X A + Aᵀ X − S_X R† S_Xᵀ + Q‖
    pub residual_norm: f64,
    /// ‖(S + X B) G‖
    pub constraint_defect: f64,
    /// `1 + ‖X‖‖A‖ + ‖Π‖`; both defects are compared against `tol · scale`.
    pub scale: f64,
}

impl CandidateSolution {
    pub fn unchecked(x: Matrix) -> Self {
        CandidateSolution {
            x,
            status: Status::Unchecked,
            residual_norm: f64::NAN,
            constraint_defect: f64::NAN,
            scale: f64::NAN,
        }
    }

    pub fn is_cgcare(&self) -> bool {
        self.status == Status::Cgcare
    }

    pub fn solves_gcare(&self) -> bool {
        matches!(self.status, Status::Cgcare | Status::GcareOnly)
    }
}

/// Matrices attached to `(Σ, X)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivedMatrices {
    /// `Q + AᵀX + XA`
    pub q_x: Matrix,
    /// `S + XB`
    pub s_x: Matrix,
    /// `R† S_Xᵀ`
    pub k_x: Matrix,
    /// `A − B K_X`
    pub a_x: Matrix,
    /// `C − D K_X` for the factor `Π = [C D]ᵀ[C D]`
    pub c_x: Matrix,
    /// `Q − S R† Sᵀ + X B R† Bᵀ X`
    pub q0x: Matrix,
    /// `[[Q_X, S_X], [S_Xᵀ, R]]`
    pub pi_x: Matrix,
    pub factor: OutputFactorization,
}

fn check_x(sigma: &PopovTriple, x: &Matrix) -> Result<()> {
    let n = sigma.n();
    if x.shape() != (n, n) {
        return Err(input_err!("X is {}x{}, expected {}x{}", x.rows(), x.cols(), n, n));
    }
    x.ensure_finite("X")?;
    if !x.is_symmetric(1e-10) {
        return Err(input_err!("X is not symmetric"));
    }
    Ok(())
}

pub fn derived_matrices(sigma: &PopovTriple, x: &Matrix, tol: f64) -> Result<DerivedMatrices> {
    check_x(sigma, x)?;
    let (a, b, q, s, r) = (sigma.a(), sigma.b(), sigma.q(), sigma.s(), sigma.r());
    let r_pinv = pinv(r, tol)?;
    let q_x = &(q + &(&a.transpose() * x)) + &(x * a);
    let s_x = s + &(x * b);
    let k_x = &r_pinv * &s_x.transpose();
    let a_x = a - &(b * &k_x);
    let factor = factor_popov(sigma, tol)?;
    let c_x = &factor.c - &(&factor.d * &k_x);
    let xb = x * b;
    let q0x = &(q - &(&(s * &r_pinv) * &s.transpose())) + &(&(&xb * &r_pinv) * &xb.transpose());
    let pi_x = Matrix::block2(&q_x, &s_x, &s_x.transpose(), r);
    Ok(DerivedMatrices {
        q_x,
        s_x,
        k_x,
        a_x,
        c_x,
        q0x,
        pi_x,
        factor,
    })
}

/// `X A + Aᵀ X − (S + X B) R† (Sᵀ + Bᵀ X) + Q`
pub fn gcare_residual(sigma: &PopovTriple, x: &Matrix, tol: f64) -> Result<Matrix> {
    check_x(sigma, x)?;
    let a = sigma.a();
    let r_pinv = pinv(sigma.r(), tol)?;
    let s_x = sigma.s() + &(x * sigma.b());
    Ok(&(&(&(x * a) + &(&a.transpose() * x)) - &(&(&s_x * &r_pinv) * &s_x.transpose())) + sigma.q())
}

/// Checks the Riccati residual and the kernel constraint against
/// `tol · (1 + ‖X‖‖A‖ + ‖Π‖)`.
pub fn verify_cgcare(sigma: &PopovTriple, x: &Matrix, tol: f64) -> Result<CandidateSolution> {
    let res = gcare_residual(sigma, x, tol)?;
    let split = input_split(sigma, tol)?;
    let s_x = sigma.s() + &(x * sigma.b());
    let constraint_defect = (&s_x * &split.g).norm();
    let residual_norm = res.norm();
    let scale = 1.0 + x.norm() * sigma.a().norm() + sigma.pi().norm();
    let thr = tol * scale;
    let status = match (residual_norm <= thr, constraint_defect <= thr) {
        (true, true) => Status::Cgcare,
        (true, false) => Status::GcareOnly,
        _ => Status::Failed,
    };
    Ok(CandidateSolution {
        x: x.clone(),
        status,
        residual_norm,
        constraint_defect,
        scale,
    })
}

pub(crate) fn require_cgcare(sigma: &PopovTriple, x: &Matrix, tol: f64) -> Result<CandidateSolution> {
    let c = verify_cgcare(sigma, x, tol)?;
    if !c.is_cgcare() {
        return Err(Error::Domain(format!(
            "X does not solve CGCARE (residual {:e}, constraint defect {:e}, threshold {:e})",
            c.residual_norm,
            c.constraint_defect,
            tol * c.scale
        )));
    }
    Ok(c)
}

/// `W(s) = R^{1/2} R† S_Xᵀ (sI − A)⁻¹ B + R^{1/2}`, a spectral factor of the
/// Popov function: `Φ(s) = Wᵀ(−s) W(s)`.
pub fn spectral_factor_sample(
    sigma: &PopovTriple,
    x: &Matrix,
    s: Complex64,
    tol: f64,
) -> Result<CMatrix> {
    require_cgcare(sigma, x, tol)?;
    ensure_not_pole(sigma.a(), s, tol)?;
    let r_half = psd_sqrt(sigma.r(), tol)?;
    let r_pinv = pinv(sigma.r(), tol)?;
    let s_x = sigma.s() + &(x * sigma.b());
    let gain = &(&r_half * &r_pinv) * &s_x.transpose();
    let res = resolvent_times(sigma.a(), sigma.b(), s)?;
    Ok((&CMatrix::from_real(&gain) * &res).add(&CMatrix::from_real(&r_half)))
}

/// Normal rank of the Popov function, estimated as the largest rank over
/// seeded sample points.
pub fn normal_rank_popov(sigma: &PopovTriple, x: &Matrix, settings: Settings) -> Result<usize> {
    require_cgcare(sigma, x, settings.tol)?;
    let poles: alloc::vec::Vec<Complex64> = crate::linalg::eig(sigma.a())?
        .iter()
        .flat_map(|z| [*z, -*z])
        .collect();
    let mut best = 0;
    for s in sample_points(settings.seed, 8, &poles, 0.05) {
        let (phi, scale) = popov_with_scale(sigma, s, settings.tol)?;
        best = best.max(complex_rank_scaled(&phi, scale, settings.tol)?);
    }
    Ok(best)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::rank;
    use crate::popov::popov_function;

    pub(crate) fn example1() -> PopovTriple {
        PopovTriple::new(
            Matrix::from_rows(&[[-4.0, 0.0], [2.0, 6.0]]),
            Matrix::from_rows(&[[0.0, -7.0], [2.0, -4.0]]),
            Matrix::diag(&[17.0 / 4.0, 0.0]),
            Matrix::zeros(2, 2),
            Matrix::diag(&[0.0, 4.0]),
        )
        .unwrap()
    }

    pub(crate) fn example2() -> PopovTriple {
        PopovTriple::from_output(
            Matrix::from_rows(&[[-8.0, 0.0], [6.0, 0.0]]),
            Matrix::from_rows(&[[0.0], [-4.0]]),
            &Matrix::from_rows(&[[4.0, 0.0]]),
            &Matrix::zeros(1, 1),
        )
        .unwrap()
    }

    pub(crate) fn example3() -> PopovTriple {
        PopovTriple::new(
            Matrix::from_rows(&[[1.0, 1.0, 1.0], [-3.0, 1.0, 0.0], [1.0, 0.0, 0.0]]),
            Matrix::from_rows(&[[0.0, 2.0], [0.0, 0.0], [1.0, 0.0]]),
            Matrix::from_rows(&[[1.0, 0.0, -1.0], [0.0, 0.0, 0.0], [-1.0, 0.0, 1.0]]),
            Matrix::from_rows(&[[1.0, 0.0], [0.0, 0.0], [-1.0, 0.0]]),
            Matrix::diag(&[1.0, 0.0]),
        )
        .unwrap()
    }

    pub(crate) fn x_t(t: f64) -> Matrix {
        Matrix::from_rows(&[[9.0 * t / 16.0 + 1.0, 0.75 * t], [0.75 * t, t]])
    }

    #[test]
    fn example1_derived_matrices() {
        let d = derived_matrices(&example1(), &Matrix::diag(&[-1.0, 0.0]), 1e-8).unwrap();
        assert!(d.s_x.approx_eq(&Matrix::from_rows(&[[0.0, 7.0], [0.0, 0.0]]), 1e-15));
        assert!(d.k_x.approx_eq(&Matrix::from_rows(&[[0.0, 0.0], [7.0 / 4.0, 0.0]]), 1e-15));
        assert!(d.a_x.approx_eq(&Matrix::from_rows(&[[33.0 / 4.0, 0.0], [9.0, 6.0]]), 1e-14));
    }

    #[test]
    fn zero_x_derived_matrices() {
        let s = example3();
        let d = derived_matrices(&s, &Matrix::zeros(3, 3), 1e-8).unwrap();
        assert!(d.q_x.approx_eq(s.q(), 0.0));
        assert!(d.s_x.approx_eq(s.s(), 0.0));
        let rp = pinv(s.r(), 1e-8).unwrap();
        let f = s.a() - &(&(s.b() * &rp) * &s.s().transpose());
        assert!(d.a_x.approx_eq(&f, 1e-15));
    }

    #[test]
    fn example2_derived_matrices() {
        let s = example2();
        let d = derived_matrices(&s, &Matrix::diag(&[1.0, 0.0]), 1e-8).unwrap();
        assert!(d.k_x.max_abs() == 0.0);
        assert!(d.a_x.approx_eq(s.a(), 0.0));
    }

    #[test]
    fn asymmetric_x_rejected() {
        let r = derived_matrices(&example1(), &Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]), 1e-8);
        assert!(matches!(r, Err(Error::Input(_))));
    }

    #[test]
    fn example1_solution_verifies() {
        let c = verify_cgcare(&example1(), &Matrix::diag(&[-1.0, 0.0]), 1e-8).unwrap();
        assert_eq!(c.status, Status::Cgcare);
        assert!(c.residual_norm <= 1e-12);
    }

    #[test]
    fn example2_family_only_t0_constrained() {
        let s = example2();
        for t in [0.0, 1.0, -2.0, 3.0] {
            let res = gcare_residual(&s, &x_t(t), 1e-8).unwrap();
            assert!(res.max_abs() < 1e-12, "t = {}", t);
            let c = verify_cgcare(&s, &x_t(t), 1e-8).unwrap();
            let want = if t == 0.0 { Status::Cgcare } else { Status::GcareOnly };
            assert_eq!(c.status, want, "t = {}", t);
        }
    }

    #[test]
    fn example3_two_solutions() {
        let s = example3();
        for x in [Matrix::zeros(3, 3), Matrix::diag(&[0.0, 0.0, 2.0])] {
            assert!(verify_cgcare(&s, &x, 1e-8).unwrap().is_cgcare());
        }
        assert_eq!(
            verify_cgcare(&s, &Matrix::diag(&[0.0, 0.0, 1.0]), 1e-8).unwrap().status,
            Status::Failed
        );
    }

    #[test]
    fn trivial_weights_residual() {
        let s = PopovTriple::new(
            Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]),
            Matrix::identity(2),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 2),
        )
        .unwrap();
        assert_eq!(gcare_residual(&s, &Matrix::zeros(2, 2), 1e-8).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn example1_spectral_factor() {
        let s = example1();
        let x = Matrix::diag(&[-1.0, 0.0]);
        let z = Complex64::new(1.0, 0.0);
        let w = spectral_factor_sample(&s, &x, z, 1e-8).unwrap();
        let wm = spectral_factor_sample(&s, &x, -z, 1e-8).unwrap();
        let phi = popov_function(&s, z, None, 1e-8).unwrap();
        assert!((&wm.transpose() * &w).max_diff(&phi) < 1e-8);
    }

    #[test]
    fn spectral_factor_regular_case() {
        // R = I, S = 0: W(s) = I + BᵀX(sI − A)⁻¹B for the CARE solution
        let s = PopovTriple::new(
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]),
            Matrix::from_rows(&[[0.0], [1.0]]),
            Matrix::identity(2),
            Matrix::zeros(2, 1),
            Matrix::identity(1),
        )
        .unwrap();
        let x = solve_reduced(&s, None, Settings::default()).unwrap().x;
        let z = Complex64::new(0.0, 2.0);
        let w = spectral_factor_sample(&s, &x, z, 1e-8).unwrap();
        let direct = (&CMatrix::from_real(&(&s.b().transpose() * &x))
            * &resolvent_times(s.a(), s.b(), z).unwrap())
            .add(&CMatrix::identity(1));
        assert!(w.max_diff(&direct) < 1e-12);
        let wm = spectral_factor_sample(&s, &x, -z, 1e-8).unwrap();
        let phi = popov_function(&s, z, None, 1e-8).unwrap();
        assert!((&wm.transpose() * &w).max_diff(&phi) < 1e-10);
    }

    #[test]
    fn spectral_factor_without_inputs_is_constant() {
        let s = PopovTriple::new(
            Matrix::from_rows(&[[-1.0, 0.0], [0.0, -2.0]]),
            Matrix::zeros(2, 1),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 1),
            Matrix::diag(&[9.0]),
        )
        .unwrap();
        let x = Matrix::zeros(2, 2);
        for z in [Complex64::new(0.3, 0.7), Complex64::new(5.0, -1.0)] {
            let w = spectral_factor_sample(&s, &x, z, 1e-8).unwrap();
            assert!((w[(0, 0)] - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn normal_rank_matches_rank_r() {
        let st = Settings::default();
        assert_eq!(normal_rank_popov(&example1(), &Matrix::diag(&[-1.0, 0.0]), st).unwrap(), 1);
        assert_eq!(normal_rank_popov(&example2(), &Matrix::diag(&[1.0, 0.0]), st).unwrap(), 0);
        let s3 = example3();
        assert_eq!(
            normal_rank_popov(&s3, &Matrix::zeros(3, 3), st).unwrap(),
            rank(s3.r(), 1e-8).unwrap()
        );
    }

    #[test]
    fn unverified_candidate_rejected() {
        let r = normal_rank_popov(&example2(), &x_t(1.0), Settings::default());
        assert!(matches!(r, Err(Error::Domain(_))));
    }
}
