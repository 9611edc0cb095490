use alloc::vec::Vec;

use super::qr::orthogonal_complement;
use super::{Matrix, Subspace};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 80;

/// Thin singular value decomposition `A = U diag(s) Vᵀ`, singular values
/// in non-increasing order. `U` is m×k and `V` is n×k with k = min(m, n).
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl Svd {
    /// One-sided (Hestenes) Jacobi SVD.
    pub fn new(a: &Matrix) -> Result<Svd> {
        a.ensure_finite("matrix")?;
        let (m, n) = a.shape();
        if m < n {
            let t = jacobi(&a.transpose())?;
            return Ok(Svd {
                u: t.v,
                s: t.s,
                v: t.u,
            });
        }
        jacobi(a)
    }

    pub fn max(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Numerical rank: singular values above `tol · σ_max · max(m, n)`.
    pub fn rank(&self, tol: f64) -> usize {
        let thr = rank_threshold(self.max(), self.u.rows().max(self.v.rows()), tol);
        self.s.iter().take_while(|&&x| x > thr).count()
    }
}

pub(crate) fn rank_threshold(smax: f64, maxdim: usize, tol: f64) -> f64 {
    tol * smax * (maxdim.max(1) as f64)
}

fn jacobi(a: &Matrix) -> Result<Svd> {
    let (m, n) = a.shape();
    debug_assert!(m >= n);
    let mut w = a.clone();
    let mut v = Matrix::identity(n);
    let eps = f64::EPSILON;
    // columns with squared norm below this are zero at working precision
    let floor = {
        let f = a.norm() * eps * (m as f64);
        f * f
    };
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if alpha.min(beta) <= floor || gamma.abs() <= (m as f64) * eps * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..m {
                    let (wp, wq) = (w[(i, p)], w[(i, q)]);
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let (vp, vq) = (v[(i, p)], v[(i, q)]);
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            routine: "jacobi svd",
            iterations: MAX_SWEEPS,
        });
    }
    let norms: Vec<f64> = (0..n)
        .map(|j| libm::sqrt((0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<f64>()))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[j].partial_cmp(&norms[i]).unwrap_or(core::cmp::Ordering::Equal));
    let s: Vec<f64> = order.iter().map(|&j| norms[j]).collect();
    let u = Matrix::from_fn(m, n, |i, k| {
        let j = order[k];
        if norms[j] > 0.0 {
            w[(i, j)] / norms[j]
        } else {
            0.0
        }
    });
    let v = v.select_columns(&order);
    Ok(Svd { u, s, v })
}

/// Rank-revealing factorization of a matrix: its rank and orthonormal bases
/// of the four fundamental subspaces we need.
#[derive(Clone, Debug)]
pub struct RankFactor {
    pub rank: usize,
    pub singular_values: Vec<f64>,
    pub col_space: Subspace,
    pub row_space: Subspace,
    pub null_space: Subspace,
    pub left_null_space: Subspace,
}

pub fn rank_factor(m: &Matrix, tol: f64) -> Result<RankFactor> {
    let svd = Svd::new(m)?;
    let r = svd.rank(tol);
    let ur = svd.u.columns(0, r);
    let vr = svd.v.columns(0, r);
    let null = orthogonal_complement(&vr);
    let left_null = orthogonal_complement(&ur);
    Ok(RankFactor {
        rank: r,
        singular_values: svd.s,
        col_space: Subspace::from_orthonormal(ur),
        row_space: Subspace::from_orthonormal(vr),
        null_space: Subspace::from_orthonormal(null),
        left_null_space: Subspace::from_orthonormal(left_null),
    })
}

pub fn rank(m: &Matrix, tol: f64) -> Result<usize> {
    if m.is_empty() {
        return Ok(0);
    }
    Ok(Svd::new(m)?.rank(tol))
}

/// Moore–Penrose pseudo-inverse, truncating singular values below the rank
/// threshold.
pub fn pinv(m: &Matrix, tol: f64) -> Result<Matrix> {
    let (rows, cols) = m.shape();
    if m.is_empty() {
        return Ok(Matrix::zeros(cols, rows));
    }
    let svd = Svd::new(m)?;
    let r = svd.rank(tol);
    let mut out = Matrix::zeros(cols, rows);
    for k in 0..r {
        let inv = 1.0 / svd.s[k];
        for i in 0..cols {
            let vik = svd.v[(i, k)] * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..rows {
                out[(i, j)] += vik * svd.u[(j, k)];
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_has_rank_zero() {
        let rf = rank_factor(&Matrix::zeros(2, 2), 1e-8).unwrap();
        assert_eq!(rf.rank, 0);
        assert_eq!(rf.null_space.dim(), 2);
        assert_eq!(rf.left_null_space.dim(), 2);
    }

    #[test]
    fn identity_has_full_rank() {
        let rf = rank_factor(&Matrix::identity(3), 1e-8).unwrap();
        assert_eq!(rf.rank, 3);
        assert_eq!(rf.null_space.dim(), 0);
    }

    #[test]
    fn kernel_of_singular_weight() {
        // R = diag(0, 4): kernel spanned by e1
        let rf = rank_factor(&Matrix::diag(&[0.0, 4.0]), 1e-8).unwrap();
        assert_eq!(rf.rank, 1);
        let k = rf.null_space.basis();
        assert_eq!(k.cols(), 1);
        assert!((k[(0, 0)].abs() - 1.0).abs() < 1e-15);
        assert!(k[(1, 0)].abs() < 1e-15);
    }

    #[test]
    fn pinv_of_tall_block() {
        let m = Matrix::from_rows(&[[0.0, 0.0], [1.0, -4.0], [0.0, 0.0]]);
        let p = pinv(&m, 1e-8).unwrap();
        let expected = Matrix::from_rows(&[[0.0, 1.0, 0.0], [0.0, -4.0, 0.0]]).scale(1.0 / 17.0);
        assert!(p.approx_eq(&expected, 1e-15));
    }

    #[test]
    fn non_finite_rejected() {
        let m = Matrix::from_rows(&[[f64::NAN, 0.0]]);
        assert!(matches!(rank_factor(&m, 1e-8), Err(Error::Input(_))));
    }

    #[test]
    fn wide_matrix_svd() {
        let a = Matrix::from_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let svd = Svd::new(&a).unwrap();
        let rec = &(&svd.u * &Matrix::diag(&svd.s)) * &svd.v.transpose();
        assert!(rec.approx_eq(&a, 1e-13));
        assert_eq!(svd.rank(1e-8), 2);
    }
}
