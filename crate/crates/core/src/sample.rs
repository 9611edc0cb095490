//! Seeded sampling: evaluation points for rational-matrix identities,
//! random data for mixing inputs during pole placement, and random singular
//! problem instances with a known solution structure.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cgcare::solve_reduced;
use crate::linalg::qr::householder_qr;
use crate::linalg::{pinv, Matrix, Svd};
use crate::popov::PopovTriple;
use crate::Settings;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Matrix with entries uniform in [-1, 1).
pub fn uniform_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.gen_range(-1.0..1.0))
}

/// `count` complex points in a box scaled to the poles, each at least
/// `margin · (1 + |p|)` away from every pole `p`.
pub fn sample_points(seed: u64, count: usize, poles: &[Complex64], margin: f64) -> Vec<Complex64> {
    let mut r = rng(seed);
    let scale = 1.0 + poles.iter().fold(0.0f64, |m, p| m.max(p.norm()));
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        let z = Complex64::new(
            r.gen_range(-2.0..2.0) * scale,
            r.gen_range(-2.0..2.0) * scale,
        );
        // shrink the exclusion disk if the box is crowded
        let m = if attempts > 1000 * count { margin * 0.1 } else { margin };
        if poles.iter().all(|p| (z - p).norm() > m * (1.0 + p.norm())) {
            out.push(z);
        }
    }
    out
}

pub fn random_orthogonal<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    householder_qr(&uniform_matrix(rng, n, n)).0
}

/// A random singular problem together with its default CGCARE solution.
#[derive(Clone, Debug)]
pub struct Instance {
    pub sigma: PopovTriple,
    pub x: Matrix,
    /// Output factor `Π = [C D]ᵀ [C D]` used to build the instance.
    pub c: Matrix,
    pub d: Matrix,
    /// `dim R0,X`
    pub r: usize,
    pub m1: usize,
    pub m2: usize,
}

/// A Popov triple with a CGCARE solution, built in coordinates where
/// `R0 = span{e1..er}` and `ker R` is the last `m2` inputs, then rotated by
/// random orthogonal state and input changes. The solution comes from
/// [`solve_reduced`]; `None` when it declines the instance or the solution is
/// badly conditioned (`‖X‖ > 1e3`, or X nearly singular off `R0`).
pub fn structured_instance(seed: u64) -> Option<Instance> {
    let mut g = rng(seed);
    let n = g.gen_range(2..=6usize);
    let m2 = g.gen_range(0..=2usize);
    let m1 = g.gen_range(if m2 == 0 { 1 } else { 0 }..=2usize);
    let m = m1 + m2;
    let r = if m2 == 0 { 0 } else { g.gen_range(1..n) };
    let p = m1 + g.gen_range(1..=2usize);

    let mut d = Matrix::zeros(p, m);
    d.set_block(0, 0, &uniform_matrix(&mut g, p, m1));
    let mixing = uniform_matrix(&mut g, m, r);
    let mut c = Matrix::zeros(p, n);
    c.set_block(0, 0, &(&d * &mixing));
    c.set_block(0, r, &uniform_matrix(&mut g, p, n - r));

    let mut f = uniform_matrix(&mut g, n, n);
    for i in r..n {
        for j in 0..r {
            f[(i, j)] = 0.0;
        }
    }
    let mut b = Matrix::zeros(n, m);
    b.set_block(0, 0, &uniform_matrix(&mut g, n, m1));
    b.set_block(0, m1, &uniform_matrix(&mut g, r, m2));

    let s = &c.transpose() * &d;
    let rr = &d.transpose() * &d;
    let a = &f + &(&(&b * &pinv(&rr, 1e-12).ok()?) * &s.transpose());

    let t = random_orthogonal(&mut g, n);
    let v = random_orthogonal(&mut g, m);
    let tt = t.transpose();
    let c = &c * &t;
    let d = &d * &v;
    let sigma = PopovTriple::from_output(&(&tt * &a) * &t, &(&tt * &b) * &v, &c, &d).ok()?;
    let x = solve_reduced(&sigma, None, Settings::default()).ok()?.x;
    let sv = Svd::new(&x).ok()?.s;
    if sv[0] > 1e3 || (n > r && sv[n - r - 1] < 1e-5 * sv[0]) {
        return None;
    }
    Some(Instance {
        sigma,
        x,
        c,
        d,
        r,
        m1,
        m2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_away_from_poles() {
        let poles = [Complex64::new(1.0, 0.0), Complex64::new(-2.0, 1.0)];
        let a = sample_points(7, 10, &poles, 0.05);
        let b = sample_points(7, 10, &poles, 0.05);
        assert_eq!(a, b);
        for z in &a {
            for p in &poles {
                assert!((z - p).norm() > 0.05 * (1.0 + p.norm()));
            }
        }
    }
}
