use alloc::vec::Vec;

use num_complex::Complex64;

use super::{Matrix, Spectrum};
use crate::error::{input_err, Error, Result};

/// Real Schur form `A = Z T Zᵀ`: `Z` orthogonal, `T` quasi upper triangular
/// with 1×1 blocks for real eigenvalues and 2×2 blocks for complex pairs.
#[derive(Clone, Debug)]
pub struct RealSchur {
    pub t: Matrix,
    pub z: Matrix,
}

impl RealSchur {
    pub fn new(a: &Matrix) -> Result<RealSchur> {
        if !a.is_square() {
            return Err(input_err!("Schur form needs a square matrix, got {}x{}", a.rows(), a.cols()));
        }
        a.ensure_finite("matrix")?;
        let (mut h, mut z) = hessenberg(a);
        francis(&mut h, &mut z)?;
        Ok(RealSchur { t: h, z })
    }

    /// Diagonal blocks as `(start, size)`.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        let n = self.t.rows();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            if i + 1 < n && self.t[(i + 1, i)] != 0.0 {
                out.push((i, 2));
                i += 2;
            } else {
                out.push((i, 1));
                i += 1;
            }
        }
        out
    }

    pub fn eigenvalues(&self) -> Spectrum {
        let mut ev = Vec::with_capacity(self.t.rows());
        for (i, size) in self.blocks() {
            if size == 1 {
                ev.push(Complex64::new(self.t[(i, i)], 0.0));
            } else {
                let (l1, l2) = block_eigenvalues(
                    self.t[(i, i)],
                    self.t[(i, i + 1)],
                    self.t[(i + 1, i)],
                    self.t[(i + 1, i + 1)],
                );
                ev.push(l1);
                ev.push(l2);
            }
        }
        Spectrum::new(ev)
    }
}

/// Eigenvalues of a square real matrix via Hessenberg reduction and
/// implicitly shifted (Francis double-shift) QR.
pub fn eig(m: &Matrix) -> Result<Spectrum> {
    Ok(RealSchur::new(m)?.eigenvalues())
}

fn block_eigenvalues(a: f64, b: f64, c: f64, d: f64) -> (Complex64, Complex64) {
    let mid = 0.5 * (a + d);
    let half = 0.5 * (a - d);
    let disc = half * half + b * c;
    if disc >= 0.0 {
        let r = libm::sqrt(disc);
        (Complex64::new(mid + r, 0.0), Complex64::new(mid - r, 0.0))
    } else {
        let r = libm::sqrt(-disc);
        (Complex64::new(mid, r), Complex64::new(mid, -r))
    }
}

/// Householder reduction to upper Hessenberg form, `A = Z H Zᵀ`.
pub fn hessenberg(a: &Matrix) -> (Matrix, Matrix) {
    let n = a.rows();
    let mut h = a.clone();
    let mut z = Matrix::identity(n);
    for k in 0..n.saturating_sub(2) {
        let norm = libm::sqrt((k + 1..n).map(|i| h[(i, k)] * h[(i, k)]).sum::<f64>());
        if norm == 0.0 {
            continue;
        }
        let alpha = if h[(k + 1, k)] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k + 1..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv == 0.0 {
            continue;
        }
        apply_left(&mut h, &v, vtv, k + 1, 0, n);
        apply_right(&mut h, &v, vtv, k + 1, 0, n);
        apply_right(&mut z, &v, vtv, k + 1, 0, n);
        h[(k + 1, k)] = alpha;
        for i in k + 2..n {
            h[(i, k)] = 0.0;
        }
    }
    (h, z)
}

/// `M[r0.., c_lo..c_hi] <- (I − 2vvᵀ/vᵀv) M[r0.., c_lo..c_hi]`
fn apply_left(m: &mut Matrix, v: &[f64], vtv: f64, r0: usize, c_lo: usize, c_hi: usize) {
    for j in c_lo..c_hi {
        let dot: f64 = v.iter().enumerate().map(|(i, vi)| vi * m[(r0 + i, j)]).sum();
        let f = 2.0 * dot / vtv;
        for (i, vi) in v.iter().enumerate() {
            m[(r0 + i, j)] -= f * vi;
        }
    }
}

/// `M[r_lo..r_hi, c0..] <- M[r_lo..r_hi, c0..] (I − 2vvᵀ/vᵀv)`
fn apply_right(m: &mut Matrix, v: &[f64], vtv: f64, c0: usize, r_lo: usize, r_hi: usize) {
    for i in r_lo..r_hi {
        let dot: f64 = v.iter().enumerate().map(|(j, vj)| vj * m[(i, c0 + j)]).sum();
        let f = 2.0 * dot / vtv;
        for (j, vj) in v.iter().enumerate() {
            m[(i, c0 + j)] -= f * vj;
        }
    }
}

fn francis(h: &mut Matrix, z: &mut Matrix) -> Result<()> {
    let n = h.rows();
    if n < 2 {
        return Ok(());
    }
    let eps = f64::EPSILON;
    let hnorm = h.max_abs().max(f64::MIN_POSITIVE);
    let max_total = 100 * n;
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    loop {
        // locate the top of the unreduced block ending at `hi`
        let mut l = hi;
        while l > 0 {
            let mut s = h[(l - 1, l - 1)].abs() + h[(l, l)].abs();
            if s == 0.0 {
                s = hnorm;
            }
            if h[(l, l - 1)].abs() <= eps * s {
                h[(l, l - 1)] = 0.0;
                break;
            }
            l -= 1;
        }
        if l == hi {
            its = 0;
            if hi == 0 {
                break;
            }
            hi -= 1;
            continue;
        }
        if l + 1 == hi {
            standardize_block(h, z, l);
            its = 0;
            if hi < 2 {
                break;
            }
            hi -= 2;
            continue;
        }

        its += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NoConvergence {
                routine: "francis qr",
                iterations: total,
            });
        }

        let (tr, det) = if its % 10 == 0 {
            // exceptional shift
            let s = h[(hi, hi - 1)].abs() + h[(hi - 1, hi - 2)].abs();
            (1.5 * s, s * s)
        } else {
            let (a, b, c, d) = (h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)]);
            (a + d, a * d - b * c)
        };

        let mut x = h[(l, l)] * h[(l, l)] + h[(l, l + 1)] * h[(l + 1, l)] - tr * h[(l, l)] + det;
        let mut y = h[(l + 1, l)] * (h[(l, l)] + h[(l + 1, l + 1)] - tr);
        let mut zz = if l + 2 <= hi {
            h[(l + 1, l)] * h[(l + 2, l + 1)]
        } else {
            0.0
        };

        for k in l..hi {
            let size = if k + 2 <= hi { 3 } else { 2 };
            let u = [x, y, zz];
            let norm = libm::sqrt(u[..size].iter().map(|t| t * t).sum::<f64>());
            if norm != 0.0 {
                let alpha = if u[0] > 0.0 { -norm } else { norm };
                let mut v = [u[0] - alpha, u[1], u[2]];
                if size == 2 {
                    v[2] = 0.0;
                }
                let v = &v[..size];
                let vtv: f64 = v.iter().map(|t| t * t).sum();
                if vtv != 0.0 {
                    let c_lo = if k > l { k - 1 } else { k };
                    apply_left(h, v, vtv, k, c_lo, n);
                    let r_hi = (k + 4).min(hi + 1);
                    apply_right(h, v, vtv, k, 0, r_hi);
                    apply_right(z, v, vtv, k, 0, n);
                    if k > l {
                        h[(k, k - 1)] = alpha;
                        h[(k + 1, k - 1)] = 0.0;
                        if size == 3 {
                            h[(k + 2, k - 1)] = 0.0;
                        }
                    }
                }
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
                zz = if k + 3 <= hi { h[(k + 3, k)] } else { 0.0 };
            }
        }
    }
    // clear rounding residue below the first subdiagonal
    for i in 2..n {
        for j in 0..i - 1 {
            h[(i, j)] = 0.0;
        }
    }
    Ok(())
}

/// Splits a 2×2 diagonal block with real eigenvalues into two 1×1 blocks by
/// a Givens rotation; complex pairs are left as they are.
fn standardize_block(h: &mut Matrix, z: &mut Matrix, p: usize) {
    let n = h.rows();
    let (a, b, c, d) = (h[(p, p)], h[(p, p + 1)], h[(p + 1, p)], h[(p + 1, p + 1)]);
    if c == 0.0 {
        return;
    }
    let half = 0.5 * (a - d);
    let disc = half * half + b * c;
    if disc < 0.0 {
        return;
    }
    let root = libm::sqrt(disc);
    let lambda = 0.5 * (a + d) + if half >= 0.0 { root } else { -root };
    // eigenvector of the block for `lambda`
    let (v1, v2) = {
        let c1 = (b, lambda - a);
        let c2 = (lambda - d, c);
        let n1 = c1.0 * c1.0 + c1.1 * c1.1;
        let n2 = c2.0 * c2.0 + c2.1 * c2.1;
        if n1 >= n2 {
            c1
        } else {
            c2
        }
    };
    let nv = libm::sqrt(v1 * v1 + v2 * v2);
    if nv == 0.0 {
        return;
    }
    let (cs, sn) = (v1 / nv, v2 / nv);
    // G = [[cs, -sn], [sn, cs]];  H <- Gᵀ H G,  Z <- Z G
    for j in 0..n {
        let (hp, hq) = (h[(p, j)], h[(p + 1, j)]);
        h[(p, j)] = cs * hp + sn * hq;
        h[(p + 1, j)] = -sn * hp + cs * hq;
    }
    for i in 0..n {
        let (hp, hq) = (h[(i, p)], h[(i, p + 1)]);
        h[(i, p)] = cs * hp + sn * hq;
        h[(i, p + 1)] = -sn * hp + cs * hq;
    }
    for i in 0..n {
        let (zp, zq) = (z[(i, p)], z[(i, p + 1)]);
        z[(i, p)] = cs * zp + sn * zq;
        z[(i, p + 1)] = -sn * zp + cs * zq;
    }
    h[(p + 1, p)] = 0.0;
}
