//! Solver through the quotient modulo `R0 = ⟨F | im B G⟩`, `F = A − B R† Sᵀ`.
//!
//! Every solution vanishes on `R0`, so in an orthonormal basis `[U1 U2]`
//! adapted to `R0` it has the form `diag(0, X22)` and `X22` solves a regular
//! CARE with data `(U2ᵀ F U2, U2ᵀ B T1, U2ᵀ Q0 U2, T1ᵀ R T1)`.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{verify_cgcare, CandidateSolution};
use crate::error::{input_err, Error, Result};
use crate::geometry::reachable_subspace;
use crate::linalg::{eig, pinv, solve_lyapunov, Matrix, Spectrum, Svd};
use crate::popov::{check_popov, input_split, PopovTriple};
use crate::Settings;

const SIGN_MAX_ITER: usize = 100;

pub fn solve_reduced(
    sigma: &PopovTriple,
    targets: Option<&Spectrum>,
    settings: Settings,
) -> Result<CandidateSolution> {
    let tol = settings.tol;
    let report = check_popov(sigma, tol)?;
    if !report.psd.passed {
        return Err(Error::Domain(format!(
            "weight matrix is not positive semidefinite (defect {:e})",
            report.psd.defect
        )));
    }
    let n = sigma.n();
    let split = input_split(sigma, tol)?;
    let r_pinv = pinv(sigma.r(), tol)?;
    let (a, b, s) = (sigma.a(), sigma.b(), sigma.s());
    let f = a - &(&(b * &r_pinv) * &s.transpose());
    let q0 = (sigma.q() - &(&(s * &r_pinv) * &s.transpose())).symmetric_part();

    let r0 = reachable_subspace(&f, &(b * &split.g), tol)?;
    let u1 = r0.basis();
    let u2 = r0.complement().into_basis();
    let k = u2.cols();

    let q0_on_r0 = (&q0 * u1).norm();
    if q0_on_r0 > tol * sigma.scale() {
        return Err(Error::NoSolution(format!(
            "Q − S R† Sᵀ does not vanish on the reachable subspace of (F, BG) (defect {:e})",
            q0_on_r0
        )));
    }

    let x22 = if k == 0 {
        Matrix::zeros(0, 0)
    } else {
        let f22 = &(&u2.transpose() * &f) * &u2;
        let q22 = (&(&u2.transpose() * &q0) * &u2).symmetric_part();
        if split.m1 == 0 {
            solve_lyapunov(&f22, &q22).map_err(|e| match e {
                Error::SingularSylvester { eigenvalue } => Error::Unsupported(format!(
                    "quotient Lyapunov operator is singular (eigenvalue {})",
                    eigenvalue
                )),
                other => other,
            })?
        } else {
            let b_red = &(&u2.transpose() * b) * &split.t1;
            let g_red = &(&b_red * &split.r0.inverse()?) * &b_red.transpose();
            reduced_care(&f22, &g_red.symmetric_part(), &q22, targets, tol)?
        }
    };
    let x = (&(&u2 * &x22) * &u2.transpose()).symmetric_part();
    debug_assert_eq!(x.rows(), n);

    let cand = verify_cgcare(sigma, &x, tol)?;
    if !cand.is_cgcare() {
        return Err(Error::Inconsistent(format!(
            "reduced solution failed verification (residual {:e}, constraint defect {:e})",
            cand.residual_norm, cand.constraint_defect
        )));
    }
    Ok(cand)
}

/// `X F + Fᵀ X − X G X + Q = 0` through an invariant subspace of the
/// Hamiltonian matrix `[[F, −G], [−Q, −Fᵀ]]`.
fn reduced_care(f: &Matrix, g: &Matrix, q: &Matrix, targets: Option<&Spectrum>, tol: f64) -> Result<Matrix> {
    let k = f.rows();
    let h = Matrix::block2(f, &(-g), &(-q), &(-&f.transpose()));
    let spec = eig(&h)?;
    let hn = h.norm();
    let basis = match targets {
        None => {
            let on_axis: Vec<Complex64> = spec
                .iter()
                .copied()
                .filter(|z| z.re.abs() <= tol * (1.0 + hn))
                .collect();
            if !on_axis.is_empty() {
                return Err(Error::NoStabilizingSolution { eigenvalues: on_axis });
            }
            let z = matrix_sign(&h)?;
            leading_range(&(&Matrix::identity(2 * k) - &z), k, tol)?
        }
        Some(t) => {
            if t.len() != k {
                return Err(input_err!("expected {} target eigenvalues, got {}", k, t.len()));
            }
            if !t.is_conjugate_closed(1e-12 * (1.0 + hn)) {
                return Err(input_err!("targets are not closed under conjugation"));
            }
            let chosen = nearest_subset(&spec, t);
            let rest = spec.remove(&chosen);
            let sep = chosen
                .iter()
                .flat_map(|c| rest.iter().map(move |r| (c - r).norm()))
                .fold(f64::INFINITY, f64::min);
            if sep <= 1e3 * tol * (1.0 + hn) {
                return Err(Error::Unsupported(format!(
                    "selected eigenvalues are not separated from the rest (gap {:e})",
                    sep
                )));
            }
            leading_range(&annihilator(&h, &rest), k, tol)?
        }
    };
    let y1 = basis.rows_range(0, k);
    let y2 = basis.rows_range(k, k);
    let y1_svd = Svd::new(&y1)?;
    if y1_svd.s.last().copied().unwrap_or(0.0) <= tol * y1_svd.max() * k as f64 {
        return Err(Error::Unsupported(
            "invariant subspace is not a graph over the state space (reduced pair not stabilizable)".into(),
        ));
    }
    let x = y1.transpose().solve(&y2.transpose())?.transpose().symmetric_part();
    Ok(newton_refine(f, g, q, x))
}

/// One Newton step on the Riccati residual, kept only if it helps.
fn newton_refine(f: &Matrix, g: &Matrix, q: &Matrix, x: Matrix) -> Matrix {
    let residual = |x: &Matrix| &(&(&(x * f) + &(&f.transpose() * x)) - &(&(x * g) * x)) + q;
    let res = residual(&x);
    let acl = f - &(g * &x);
    match solve_lyapunov(&acl, &res) {
        Ok(delta) => {
            let next = (&x + &delta).symmetric_part();
            if residual(&next).norm() < res.norm() {
                next
            } else {
                x
            }
        }
        Err(_) => x,
    }
}

/// Matrix sign function by scaled Newton iteration.
fn matrix_sign(h: &Matrix) -> Result<Matrix> {
    let n = h.rows();
    let mut z = h.clone();
    for _ in 0..SIGN_MAX_ITER {
        let zi = z.inverse()?;
        let det = z.det().abs();
        let c = if det > 0.0 && det.is_finite() {
            libm::pow(det, -1.0 / n as f64)
        } else {
            1.0
        };
        let next = (&z.scale(c) + &zi.scale(1.0 / c)).scale(0.5);
        let change = (&next - &z).norm1();
        z = next;
        if change <= 1e-13 * z.norm1() {
            return Ok(z);
        }
    }
    Err(Error::NoConvergence {
        routine: "matrix sign",
        iterations: SIGN_MAX_ITER,
    })
}

/// Orthonormal basis of the dominant `k`-dimensional column space.
fn leading_range(m: &Matrix, k: usize, tol: f64) -> Result<Matrix> {
    let svd = Svd::new(m)?;
    let gap_ok = svd.s.get(k - 1).copied().unwrap_or(0.0) > libm::sqrt(tol) * svd.max();
    if !gap_ok {
        return Err(Error::Unsupported(format!(
            "invariant subspace of dimension {} could not be isolated",
            k
        )));
    }
    Ok(svd.u.columns(0, k))
}

/// For each target, the nearest eigenvalue not yet taken.
fn nearest_subset(spec: &Spectrum, targets: &Spectrum) -> Spectrum {
    let mut pool: Vec<Complex64> = spec.iter().copied().collect();
    let mut out = Vec::with_capacity(targets.len());
    for t in targets {
        let (j, _) = pool
            .iter()
            .enumerate()
            .map(|(j, z)| (j, (z - t).norm()))
            .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
        out.push(pool.remove(j));
    }
    Spectrum::new(out)
}

/// `∏ (H − μ I)` over `rest`, in real arithmetic, each factor normalized.
fn annihilator(h: &Matrix, rest: &Spectrum) -> Matrix {
    let n = h.rows();
    let scale = h.norm().max(1.0);
    let h2 = h * h;
    let mut p = Matrix::identity(n);
    for mu in rest {
        let factor = if mu.im.abs() <= 1e-12 * (1.0 + mu.norm()) {
            h.add_scaled_identity(-mu.re)
        } else if mu.im > 0.0 {
            &(&h2 - &h.scale(2.0 * mu.re)) + &Matrix::identity(n).scale(mu.norm_sqr())
        } else {
            continue;
        };
        p = (&factor * &p).scale(1.0 / scale);
        let nrm = p.norm();
        if nrm > 0.0 {
            p = p.scale(1.0 / nrm);
        }
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cgcare::tests::{example1, example2, example3};
    use crate::cgcare::{derived_matrices, gcare_residual};

    #[test]
    fn example1_default_is_stable_branch() {
        let c = solve_reduced(&example1(), None, Settings::default()).unwrap();
        assert!(c.x.approx_eq(&Matrix::diag(&[17.0 / 49.0, 0.0]), 1e-12));
        let dm = derived_matrices(&example1(), &c.x, 1e-8).unwrap();
        assert!((dm.a_x[(0, 0)] + 33.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn example1_with_targets_recovers_antistable_solution() {
        let t = Spectrum::real(&[33.0 / 4.0]);
        let c = solve_reduced(&example1(), Some(&t), Settings::default()).unwrap();
        assert!(c.x.approx_eq(&Matrix::diag(&[-1.0, 0.0]), 1e-12));
    }

    #[test]
    fn example2_unique_solution() {
        let c = solve_reduced(&example2(), None, Settings::default()).unwrap();
        assert!(c.x.approx_eq(&Matrix::diag(&[1.0, 0.0]), 1e-12));
    }

    #[test]
    fn example3_finds_a_solution() {
        let c = solve_reduced(&example3(), None, Settings::default()).unwrap();
        assert!(c.is_cgcare());
        // vanishes on R0 = span{e1, e2}
        assert!(c.x.submatrix(0, 0, 3, 2).max_abs() < 1e-12);
    }

    #[test]
    fn regular_double_integrator() {
        let s = PopovTriple::new(
            Matrix::from_rows(&[[0.0, 1.0], [0.0, 0.0]]),
            Matrix::from_rows(&[[0.0], [1.0]]),
            Matrix::identity(2),
            Matrix::zeros(2, 1),
            Matrix::identity(1),
        )
        .unwrap();
        let c = solve_reduced(&s, None, Settings::default()).unwrap();
        let r3 = libm::sqrt(3.0);
        assert!(c.x.approx_eq(&Matrix::from_rows(&[[r3, 1.0], [1.0, r3]]), 1e-12));
        assert!(gcare_residual(&s, &c.x, 1e-8).unwrap().norm() < 1e-12);
    }

    #[test]
    fn imaginary_axis_hamiltonian_rejected() {
        // undamped oscillator with no control weight on position: H has ±i
        let s = PopovTriple::new(
            Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]),
            Matrix::zeros(2, 1),
            Matrix::zeros(2, 2),
            Matrix::zeros(2, 1),
            Matrix::identity(1),
        )
        .unwrap();
        // m1 = 1 but B = 0: quotient is all of ℝ², Hamiltonian eigenvalues ±i
        let r = solve_reduced(&s, None, Settings::default());
        assert!(matches!(r, Err(Error::NoStabilizingSolution { .. })), "{:?}", r);
    }

    #[test]
    fn q0_not_vanishing_on_r0() {
        // R = 0 and B reaches everything, but Q ≠ 0: no solution exists
        let s = PopovTriple::new(
            Matrix::from_rows(&[[-1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::from_rows(&[[1.0]]),
            Matrix::zeros(1, 1),
            Matrix::zeros(1, 1),
        )
        .unwrap();
        assert!(matches!(
            solve_reduced(&s, None, Settings::default()),
            Err(Error::NoSolution(_))
        ));
    }

    #[test]
    fn target_count_checked() {
        let t = Spectrum::real(&[1.0, 2.0]);
        assert!(matches!(
            solve_reduced(&example1(), Some(&t), Settings::default()),
            Err(Error::Input(_))
        ));
    }
}
