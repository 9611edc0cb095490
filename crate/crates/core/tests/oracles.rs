//! Library routines checked against slow, independent reference computations.

mod common;

use num_complex::Complex64;
use riccati_geom_core::cgcare::derived_matrices;
use riccati_geom_core::hamiltonian::{hamiltonian_pencil, invariant_zeros, pencil_decompose};
use riccati_geom_core::linalg::{eig, pinv, solve_lyapunov, solve_sylvester, CMatrix, Matrix};
use riccati_geom_core::sample::{rng, uniform_matrix};
use riccati_geom_core::Settings;

/// Dense Gaussian elimination with partial pivoting.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        assert!(a[k][k].abs() > 1e-300, "oracle system is singular");
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// `A X + X B + C = 0` through `(I ⊗ A + Bᵀ ⊗ I) vec X = −vec C`.
fn kronecker_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Matrix {
    let (n, m) = (a.rows(), b.rows());
    let idx = |i: usize, j: usize| j * n + i;
    let mut k = vec![vec![0.0; n * m]; n * m];
    for j in 0..m {
        for i in 0..n {
            for l in 0..n {
                k[idx(i, j)][idx(l, j)] += a[(i, l)];
            }
            for l in 0..m {
                k[idx(i, j)][idx(i, l)] += b[(l, j)];
            }
        }
    }
    let rhs: Vec<f64> = (0..n * m).map(|r| -c[(r % n, r / n)]).collect();
    let v = gauss_solve(k, rhs);
    Matrix::from_fn(n, m, |i, j| v[idx(i, j)])
}

#[test]
fn sylvester_matches_kronecker() {
    let mut g = rng(0x5157);
    for trial in 0..60 {
        let n = 1 + trial % 6;
        let m = 1 + (trial / 6) % 6;
        // shifts keep σ(A) and σ(−B) apart
        let a = uniform_matrix(&mut g, n, n).add_scaled_identity(3.0);
        let b = uniform_matrix(&mut g, m, m).add_scaled_identity(2.0);
        let c = uniform_matrix(&mut g, n, m);
        let x = solve_sylvester(&a, &b, &c).unwrap();
        let r = kronecker_sylvester(&a, &b, &c);
        assert!(x.max_diff(&r) <= 1e-9 * r.max_abs().max(1.0), "trial {}: {:e}", trial, x.max_diff(&r));
    }
}

#[test]
fn lyapunov_matches_kronecker() {
    let mut g = rng(0x1a9);
    for n in 1..=6 {
        let a = uniform_matrix(&mut g, n, n).add_scaled_identity(-3.0);
        let q = uniform_matrix(&mut g, n, n).symmetric_part();
        let p = solve_lyapunov(&a, &q).unwrap();
        let r = kronecker_sylvester(&a.transpose(), &a, &q);
        assert!(p.max_diff(&r) <= 1e-9 * r.max_abs().max(1.0));
        assert!(p.is_symmetric(1e-10));
    }
}

#[test]
fn pinv_satisfies_penrose_conditions() {
    let mut g = rng(0x9e2);
    for trial in 0..40 {
        let rows = 1 + trial % 5;
        let cols = 1 + (trial / 5) % 5;
        let k = 1 + trial % rows.min(cols);
        // rank k by construction
        let a = &uniform_matrix(&mut g, rows, k) * &uniform_matrix(&mut g, k, cols);
        let p = pinv(&a, 1e-10).unwrap();
        let t = 1e-10 * (1.0 + a.max_abs()) * (1.0 + p.max_abs()).powi(2);
        assert!((&(&a * &p) * &a).max_diff(&a) <= t, "A P A = A, trial {}", trial);
        assert!((&(&p * &a) * &p).max_diff(&p) <= t, "P A P = P, trial {}", trial);
        let ap = &a * &p;
        let pa = &p * &a;
        assert!(ap.max_diff(&ap.transpose()) <= t);
        assert!(pa.max_diff(&pa.transpose()) <= t);
    }
}

/// Rank by complete-pivoting elimination; pivots at or below
/// `tol · max|entry| · dim` end the count.
fn lu_rank(m: &CMatrix, tol: f64) -> usize {
    let (r, c) = (m.rows(), m.cols());
    let mut a: Vec<Vec<Complex64>> = (0..r).map(|i| (0..c).map(|j| m[(i, j)]).collect()).collect();
    let scale = m.max_abs() * r.max(c) as f64;
    let mut rank = 0;
    for k in 0..r.min(c) {
        let (mut pi, mut pj, mut best) = (k, k, 0.0);
        for (i, row) in a.iter().enumerate().skip(k) {
            for (j, z) in row.iter().enumerate().skip(k) {
                if z.norm() > best {
                    (pi, pj, best) = (i, j, z.norm());
                }
            }
        }
        if best <= tol * scale {
            break;
        }
        a.swap(k, pi);
        for row in a.iter_mut() {
            row.swap(k, pj);
        }
        for i in k + 1..r {
            let f = a[i][k] / a[k][k];
            for j in k..c {
                let t = a[k][j];
                a[i][j] -= f * t;
            }
        }
        rank += 1;
    }
    rank
}

#[test]
fn pencil_zeros_match_rank_scan() {
    let tol = 1e-8;
    let mut checked = 0;
    for seed in 0..400u64 {
        let Some(inst) = common::instance(seed) else { continue };
        let s = &inst.sigma;
        let Ok(zeros) = invariant_zeros(s, &inst.x, Settings::default()) else {
            panic!("seed {}: invariant_zeros failed", seed)
        };
        let nr = pencil_decompose(s, &inst.x, tol).unwrap().normal_rank;
        let ax = derived_matrices(s, &inst.x, tol).unwrap().a_x;
        let ev = eig(&ax).unwrap();
        let radius = 1.0 + ev.iter().fold(0.0f64, |m, z| m.max(z.norm()));

        let mut candidates: Vec<Complex64> = ev.iter().flat_map(|z| [*z, -*z]).collect();
        for i in 0..7 {
            for j in 0..7 {
                let re = radius * (i as f64 / 3.0 - 1.0) + 0.0137;
                let im = radius * (j as f64 / 3.0 - 1.0) + 0.0291;
                candidates.push(Complex64::new(re, im));
            }
        }
        let pencil_rank = |z: Complex64| lu_rank(&hamiltonian_pencil(s, &inst.x, z, tol).unwrap(), 1e-9);
        let drops: Vec<Complex64> = candidates.into_iter().filter(|z| pencil_rank(*z) < nr).collect();

        let close = |a: &Complex64, b: &Complex64| (a - b).norm() <= 1e-6 * (1.0 + a.norm());
        for z in zeros.iter() {
            assert!(drops.iter().any(|d| close(d, z)), "seed {}: zero {} has no rank drop", seed, z);
        }
        for d in &drops {
            assert!(zeros.iter().any(|z| close(d, z)), "seed {}: rank drops at {} off the zero set", seed, d);
        }
        checked += 1;
    }
    assert!(checked >= 200, "only {} instances checked", checked);
}
