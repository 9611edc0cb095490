//! Geometric control subspaces: reachable subspaces, the largest
//! output-nulling subspace `V*`, friends, reachability subspaces on an
//! output-nulling subspace, and the subspace `R0,X` attached to a solution.

use alloc::format;
use alloc::vec::Vec;

use crate::cgcare::{derived_matrices, require_cgcare, verify_cgcare};
use crate::error::{input_err, Error, Result};
use crate::linalg::{pinv, Matrix, Subspace, Svd};
use crate::popov::{input_split, PopovTriple};

/// An output-nulling subspace together with a friend `F` and the restriction
/// `Ξ` of `A + B F` to it, in the coordinates of `V`'s basis.
#[derive(Clone, Debug)]
pub struct OutputNullingCertificate {
    pub v: Subspace,
    pub friend: Matrix,
    pub xi: Matrix,
}

impl OutputNullingCertificate {
    /// `‖(A + B F) V − V Ξ‖` and `‖(C + D F) V‖`.
    pub fn defects(&self, a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> (f64, f64) {
        let vb = self.v.basis();
        let acl = a + &(b * &self.friend);
        let ccl = c + &(d * &self.friend);
        ((&(&acl * vb) - &(vb * &self.xi)).norm(), (&ccl * vb).norm())
    }
}

fn threshold(tol: f64, dim: usize, norms: &[f64]) -> f64 {
    let scale = norms.iter().fold(1.0f64, |m, x| m.max(*x));
    tol * scale * dim.max(1) as f64
}

fn check_quadruple(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Result<()> {
    let n = a.rows();
    if !a.is_square() {
        return Err(input_err!("A must be square"));
    }
    if b.rows() != n || c.cols() != n || d.rows() != c.rows() || d.cols() != b.cols() {
        return Err(input_err!(
            "inconsistent quadruple: A {}x{}, B {}x{}, C {}x{}, D {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols(),
            c.rows(),
            c.cols(),
            d.rows(),
            d.cols()
        ));
    }
    Ok(())
}

/// `⟨A | im B⟩`, the smallest `A`-invariant subspace containing `im B`.
pub fn reachable_subspace(a: &Matrix, b: &Matrix, tol: f64) -> Result<Subspace> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(input_err!("reachable_subspace: A is {}x{}, B has {} rows", n, a.cols(), b.rows()));
    }
    let thr = threshold(tol, n, &[a.norm(), b.norm()]);
    let mut v = Subspace::span_abs(b, thr)?;
    for _ in 0..n {
        if v.is_zero() || v.dim() == n {
            break;
        }
        let next = Subspace::span_abs(&b.hstack(&(a * v.basis())), thr)?;
        if next.dim() == v.dim() {
            return Ok(next);
        }
        v = next;
    }
    Ok(v)
}

/// The invariant subspace algorithm: `V0 = ℝⁿ`,
/// `V_{k+1} = {x : [A; C] x ∈ (V_k ⊕ 0) + im [B; D]}`, stopped at the first
/// repeat. The last entry is `V*`.
pub fn isa_sequence(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, tol: f64) -> Result<Vec<Subspace>> {
    check_quadruple(a, b, c, d)?;
    let n = a.rows();
    let p = c.rows();
    let ac = a.vstack(c);
    let thr_w = threshold(tol, n + p, &[b.norm(), d.norm()]);
    let thr_m = threshold(tol, n + p, &[ac.norm()]);
    let bd = b.vstack(d);
    let mut seq = alloc::vec![Subspace::full(n)];
    for _ in 0..=n {
        let vk = seq.last().unwrap();
        let lifted = vk.basis().vstack(&Matrix::zeros(p, vk.dim()));
        let w = Subspace::span_abs(&lifted.hstack(&bd), thr_w)?;
        let off = &ac - &(w.basis() * &(&w.basis().transpose() * &ac));
        let next = Subspace::kernel_abs(&off, thr_m)?;
        let next = vk.intersection(&next, tol)?;
        let done = next.dim() == vk.dim();
        seq.push(next);
        if done {
            break;
        }
    }
    Ok(seq)
}

/// `V*` with a friend.
pub fn largest_output_nulling(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    tol: f64,
) -> Result<OutputNullingCertificate> {
    let v = isa_sequence(a, b, c, d, tol)?.pop().unwrap();
    friend_certificate(a, b, c, d, &v, tol)
}

/// Solves `[A; C] V = [V; 0] Ξ + [B; D] Ω` in least squares and certifies
/// `F = −Ω Vᵀ` (zero on `V⊥`).
pub fn friend_certificate(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    v: &Subspace,
    tol: f64,
) -> Result<OutputNullingCertificate> {
    check_quadruple(a, b, c, d)?;
    let (n, m, p) = (a.rows(), b.cols(), c.rows());
    if v.ambient_dim() != n {
        return Err(input_err!("subspace lives in ℝ^{}, expected ℝ^{}", v.ambient_dim(), n));
    }
    if v.is_zero() {
        return Ok(OutputNullingCertificate {
            v: v.clone(),
            friend: Matrix::zeros(m, n),
            xi: Matrix::zeros(0, 0),
        });
    }
    let k = v.dim();
    let vb = v.basis();
    let lhs = Matrix::block2(vb, b, &Matrix::zeros(p, k), d);
    let rhs = &a.vstack(c) * vb;
    let sol = &pinv(&lhs, tol)? * &rhs;
    let xi = sol.rows_range(0, k);
    let omega = sol.rows_range(k, m);
    let cert = OutputNullingCertificate {
        v: v.clone(),
        friend: -&(&omega * &vb.transpose()),
        xi,
    };
    let (da, dc) = cert.defects(a, b, c, d);
    let thr = threshold(tol, n + p, &[a.norm(), b.norm(), c.norm(), d.norm()]);
    if da > thr || dc > thr {
        return Err(Error::Domain(format!(
            "subspace is not output-nulling: invariance defect {:e}, output defect {:e}",
            da, dc
        )));
    }
    Ok(cert)
}

pub fn friend_of(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix, v: &Subspace, tol: f64) -> Result<Matrix> {
    Ok(friend_certificate(a, b, c, d, v, tol)?.friend)
}

/// `⟨A + B F | V ∩ B ker D⟩` for a given friend `F` of `V`.
pub fn reachability_with_friend(
    a: &Matrix,
    b: &Matrix,
    d: &Matrix,
    v: &Subspace,
    f: &Matrix,
    tol: f64,
) -> Result<Subspace> {
    let ker_d = Subspace::kernel(d, tol)?;
    let bk = Subspace::span(&(b * ker_d.basis()), tol)?;
    let start = v.intersection(&bk, tol)?;
    reachable_subspace(&(a + &(b * f)), start.basis(), tol)
}

/// The reachability subspace on an output-nulling `V`.
pub fn reachability_on(
    a: &Matrix,
    b: &Matrix,
    c: &Matrix,
    d: &Matrix,
    v: &Subspace,
    tol: f64,
) -> Result<Subspace> {
    let f = friend_of(a, b, c, d, v, tol)?;
    reachability_with_friend(a, b, d, v, &f, tol)
}

/// `R0,X`, the reachable subspace of `(A_X, B G)`, cross-checked against the
/// reachable subspace of `(A − B R† Sᵀ, B G)`. The basis is
/// [`Subspace::canonical`].
pub fn r0x(sigma: &PopovTriple, x: &Matrix, tol: f64) -> Result<Subspace> {
    require_cgcare(sigma, x, tol)?;
    let dm = derived_matrices(sigma, x, tol)?;
    let bg = sigma.b() * &input_split(sigma, tol)?.g;
    let via_x = reachable_subspace(&dm.a_x, &bg, tol)?;
    let f = sigma.a() - &(&(sigma.b() * &pinv(sigma.r(), tol)?) * &sigma.s().transpose());
    let via_f = reachable_subspace(&f, &bg, tol)?;
    if !via_x.equals(&via_f, tol)? {
        return Err(Error::Inconsistent(format!(
            "reachable subspaces of (A_X, BG) and (F, BG) differ: dimensions {} and {}",
            via_x.dim(),
            via_f.dim()
        )));
    }
    Ok(via_x.canonical())
}

/// `ker X` at the rank tolerance, and whether some singular value of `X`
/// sits close enough to the threshold to make the kernel dimension fragile.
pub fn kernel_of_solution(x: &Matrix, tol: f64) -> Result<(Subspace, bool)> {
    let n = x.rows();
    let thr = threshold(tol, n, &[x.norm()]);
    let near = if n == 0 {
        false
    } else {
        Svd::new(x)?.s.iter().any(|&s| s > 1e-3 * thr && s <= 1e3 * thr)
    };
    Ok((Subspace::kernel_abs(x, thr)?, near))
}

#[derive(Clone, Debug)]
pub struct KernelReport {
    pub kernel: Subspace,
    pub is_output_nulling: bool,
    pub friend_is_minus_kx: bool,
    /// `‖(I − P Pᵀ) A_X P‖` for an orthonormal basis `P` of `ker X`.
    pub invariance_defect: f64,
    /// `‖C_X P‖`
    pub output_defect: f64,
    pub threshold: f64,
    pub near_tolerance: bool,
}

/// Checks that `ker X` is output-nulling for `(A, B, C, D)` with friend `−K_X`.
/// Needs only the unconstrained Riccati equation.
pub fn check_kernel_output_nulling(sigma: &PopovTriple, x: &Matrix, tol: f64) -> Result<KernelReport> {
    let cand = verify_cgcare(sigma, x, tol)?;
    if !cand.solves_gcare() {
        return Err(Error::Domain(format!(
            "X does not solve GCARE (residual {:e})",
            cand.residual_norm
        )));
    }
    let dm = derived_matrices(sigma, x, tol)?;
    let (kernel, near_tolerance) = kernel_of_solution(x, tol)?;
    let pb = kernel.basis();
    let ap = &dm.a_x * pb;
    let invariance_defect = (&ap - &(pb * &(&pb.transpose() * &ap))).norm();
    let output_defect = (&dm.c_x * pb).norm();
    let c = &dm.factor.c;
    let d = &dm.factor.d;
    let thr = threshold(tol, sigma.n() + c.rows(), &[sigma.scale(), dm.a_x.norm(), dm.c_x.norm()]);
    let is_output_nulling = friend_certificate(sigma.a(), sigma.b(), c, d, &kernel, tol).is_ok();
    Ok(KernelReport {
        kernel,
        is_output_nulling,
        friend_is_minus_kx: invariance_defect <= thr && output_defect <= thr,
        invariance_defect,
        output_defect,
        threshold: thr,
        near_tolerance,
    })
}
