use alloc::vec::Vec;

use super::Matrix;
use crate::error::{input_err, Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix, `M = V diag(λ) Vᵀ`, eigenvalues
/// ascending.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymEigen {
    /// Cyclic Jacobi. The input is symmetrized first; callers decide how much
    /// asymmetry they tolerate.
    pub fn new(m: &Matrix) -> Result<SymEigen> {
        if !m.is_square() {
            return Err(input_err!("symmetric eigensolver needs a square matrix"));
        }
        m.ensure_finite("matrix")?;
        let n = m.rows();
        let mut a = m.symmetric_part();
        let mut v = Matrix::identity(n);
        let mut done = n < 2;
        for _ in 0..MAX_SWEEPS {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[(i, j)] * a[(i, j)])
                .sum();
            let diag: f64 = (0..n).map(|i| a[(i, i)] * a[(i, i)]).sum();
            if off <= f64::EPSILON * f64::EPSILON * diag || off == 0.0 {
                done = true;
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a[(p, q)];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                    let t = if theta.abs() > 1e150 {
                        0.5 / theta
                    } else {
                        theta.signum() / (theta.abs() + libm::sqrt(theta * theta + 1.0))
                    };
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / libm::sqrt(t * t + 1.0);
                    let s = t * c;
                    for k in 0..n {
                        let (akp, akq) = (a[(k, p)], a[(k, q)]);
                        a[(k, p)] = c * akp - s * akq;
                        a[(k, q)] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                        a[(p, k)] = c * apk - s * aqk;
                        a[(q, k)] = s * apk + c * aqk;
                    }
                    for k in 0..n {
                        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }
        if !done {
            return Err(Error::NoConvergence {
                routine: "jacobi symmetric eigensolver",
                iterations: MAX_SWEEPS,
            });
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a[(i, i)]
                .partial_cmp(&a[(j, j)])
                .unwrap_or(core::cmp::Ordering::Equal)
        });
        Ok(SymEigen {
            values: order.iter().map(|&i| a[(i, i)]).collect(),
            vectors: v.select_columns(&order),
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}
