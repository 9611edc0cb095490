use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::schur::RealSchur;
use super::Matrix;
use crate::error::{input_err, Error, Result};

/// Solves `A X + X B + C = 0` by the Bartels–Stewart method on the real
/// Schur forms of `A` and `B`.
pub fn solve_sylvester(a: &Matrix, b: &Matrix, c: &Matrix) -> Result<Matrix> {
    let (n, m) = (a.rows(), b.rows());
    if !a.is_square() || !b.is_square() || c.shape() != (n, m) {
        return Err(input_err!(
            "Sylvester shapes: A {}x{}, B {}x{}, C {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols()
        ));
    }
    if n == 0 || m == 0 {
        return Ok(Matrix::zeros(n, m));
    }
    let sa = RealSchur::new(a)?;
    let sb = RealSchur::new(b)?;
    let f = -(&(&sa.z.transpose() * c) * &sb.z);
    let y = solve_quasi_triangular(&sa, &sb, &f)?;
    Ok(&(&sa.z * &y) * &sb.z.transpose())
}

/// Solves `Aᵀ P + P A + Q = 0`.
pub fn solve_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    solve_sylvester(&a.transpose(), a, q)
}

/// `T Y + Y S = F` with `T`, `S` quasi upper triangular.
fn solve_quasi_triangular(sa: &RealSchur, sb: &RealSchur, f: &Matrix) -> Result<Matrix> {
    let (t, s) = (&sa.t, &sb.t);
    let (n, m) = (t.rows(), s.rows());
    let scale = t.max_abs().max(s.max_abs()).max(f64::MIN_POSITIVE);
    let thr = 1e3 * f64::EPSILON * scale;
    let row_blocks = sa.blocks();
    let col_blocks = sb.blocks();
    let mut y = Matrix::zeros(n, m);
    for &(j0, nj) in &col_blocks {
        for &(i0, ni) in row_blocks.iter().rev() {
            // rhs = F_IJ − Σ_{K>I} T_IK Y_KJ − Σ_{L<J} Y_IL S_LJ
            let mut rhs = vec![0.0; ni * nj];
            for jj in 0..nj {
                for ii in 0..ni {
                    let (i, j) = (i0 + ii, j0 + jj);
                    let mut v = f[(i, j)];
                    for k in i0 + ni..n {
                        v -= t[(i, k)] * y[(k, j)];
                    }
                    for l in 0..j0 {
                        v -= y[(i, l)] * s[(l, j)];
                    }
                    // column-major vec(Y_IJ)
                    rhs[jj * ni + ii] = v;
                }
            }
            // (I ⊗ T_II + S_JJᵀ ⊗ I) vec(Y) = vec(rhs)
            let dim = ni * nj;
            let mut k = Matrix::zeros(dim, dim);
            for jj in 0..nj {
                for ii in 0..ni {
                    let row = jj * ni + ii;
                    for kk in 0..ni {
                        k[(row, jj * ni + kk)] += t[(i0 + ii, i0 + kk)];
                    }
                    for ll in 0..nj {
                        k[(row, ll * ni + ii)] += s[(j0 + ll, j0 + jj)];
                    }
                }
            }
            let sol = solve_small(&k, &rhs, thr).ok_or_else(|| Error::SingularSylvester {
                eigenvalue: block_eigenvalue(t, i0, ni),
            })?;
            for jj in 0..nj {
                for ii in 0..ni {
                    y[(i0 + ii, j0 + jj)] = sol[jj * ni + ii];
                }
            }
        }
    }
    Ok(y)
}

fn block_eigenvalue(t: &Matrix, i0: usize, ni: usize) -> Complex64 {
    if ni == 1 {
        return Complex64::new(t[(i0, i0)], 0.0);
    }
    let (a, b, c, d) = (t[(i0, i0)], t[(i0, i0 + 1)], t[(i0 + 1, i0)], t[(i0 + 1, i0 + 1)]);
    let half = 0.5 * (a - d);
    let disc = half * half + b * c;
    if disc >= 0.0 {
        Complex64::new(0.5 * (a + d) + libm::sqrt(disc), 0.0)
    } else {
        Complex64::new(0.5 * (a + d), libm::sqrt(-disc))
    }
}

/// Gaussian elimination with complete pivoting on a tiny system; `None` if
/// a pivot falls below `thr`.
fn solve_small(k: &Matrix, rhs: &[f64], thr: f64) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a = k.clone();
    let mut b = rhs.to_vec();
    let mut colperm: Vec<usize> = (0..n).collect();
    for p in 0..n {
        let (mut bi, mut bj, mut bv) = (p, p, -1.0);
        for i in p..n {
            for j in p..n {
                if a[(i, j)].abs() > bv {
                    bv = a[(i, j)].abs();
                    bi = i;
                    bj = j;
                }
            }
        }
        if bv <= thr {
            return None;
        }
        a.swap_rows(p, bi);
        b.swap(p, bi);
        if bj != p {
            for i in 0..n {
                let tmp = a[(i, p)];
                a[(i, p)] = a[(i, bj)];
                a[(i, bj)] = tmp;
            }
            colperm.swap(p, bj);
        }
        for i in p + 1..n {
            let f = a[(i, p)] / a[(p, p)];
            if f == 0.0 {
                continue;
            }
            for j in p..n {
                let t = a[(p, j)];
                a[(i, j)] -= f * t;
            }
            b[i] -= f * b[p];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut v = b[i];
        for j in i + 1..n {
            v -= a[(i, j)] * x[j];
        }
        x[i] = v / a[(i, i)];
    }
    let mut out = vec![0.0; n];
    for (p, &c) in colperm.iter().enumerate() {
        out[c] = x[p];
    }
    Some(out)
}
