use super::qr::orthogonal_complement;
use super::svd::{rank, rank_factor, Svd};
use super::Matrix;
use crate::error::{input_err, Result};

/// A linear subspace of ℝⁿ carried as an orthonormal basis matrix
/// (ambient × dim).
#[derive(Clone, Debug, PartialEq)]
pub struct Subspace {
    basis: Matrix,
}

/// Sum, intersection and order relations of two subspaces.
#[derive(Clone, Debug)]
pub struct SubspaceRelations {
    pub sum: Subspace,
    pub intersection: Subspace,
    /// `V ⊆ U`
    pub contains: bool,
    pub equal: bool,
}

impl Subspace {
    /// Wraps a basis whose columns are already orthonormal.
    pub fn from_orthonormal(basis: Matrix) -> Self {
        Subspace { basis }
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: Matrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            basis: Matrix::identity(n),
        }
    }

    /// Column space of an arbitrary matrix.
    pub fn span(m: &Matrix, tol: f64) -> Result<Self> {
        if m.cols() == 0 {
            return Ok(Subspace::zero(m.rows()));
        }
        Ok(rank_factor(m, tol)?.col_space)
    }

    /// Kernel of an arbitrary matrix.
    pub fn kernel(m: &Matrix, tol: f64) -> Result<Self> {
        if m.rows() == 0 {
            return Ok(Subspace::full(m.cols()));
        }
        Ok(rank_factor(m, tol)?.null_space)
    }

    /// Column space keeping singular directions above the absolute
    /// threshold `thr`.
    pub fn span_abs(m: &Matrix, thr: f64) -> Result<Self> {
        if m.cols() == 0 || m.rows() == 0 {
            return Ok(Subspace::zero(m.rows()));
        }
        let svd = Svd::new(m)?;
        let r = svd.s.iter().take_while(|&&x| x > thr).count();
        Ok(Subspace::from_orthonormal(svd.u.columns(0, r)))
    }

    /// Kernel, treating singular values at or below `thr` as zero.
    pub fn kernel_abs(m: &Matrix, thr: f64) -> Result<Self> {
        if m.rows() == 0 || m.cols() == 0 {
            return Ok(Subspace::full(m.cols()));
        }
        let svd = Svd::new(m)?;
        let r = svd.s.iter().take_while(|&&x| x > thr).count();
        Ok(Subspace::from_orthonormal(orthogonal_complement(&svd.v.columns(0, r))))
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn dim(&self) -> usize {
        self.basis.cols()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn into_basis(self) -> Matrix {
        self.basis
    }

    /// Orthogonal projector `P Pᵀ`.
    pub fn projector(&self) -> Matrix {
        &self.basis * &self.basis.transpose()
    }

    pub fn complement(&self) -> Subspace {
        Subspace::from_orthonormal(orthogonal_complement(&self.basis))
    }

    /// ‖(I − P Pᵀ) M‖: how far the columns of `m` stick out of the subspace.
    pub fn residual(&self, m: &Matrix) -> f64 {
        let proj = &self.basis * &(&self.basis.transpose() * m);
        (m - &proj).norm()
    }

    /// Image `M · self`, orthonormalized.
    pub fn image(&self, m: &Matrix, tol: f64) -> Result<Subspace> {
        Subspace::span(&(m * &self.basis), tol)
    }

    /// The same subspace with a reproducible basis: pivoted Gram–Schmidt on
    /// the columns of the projector, so the result depends only on the
    /// subspace and not on the basis it was computed in.
    pub fn canonical(&self) -> Subspace {
        let n = self.ambient_dim();
        let k = self.dim();
        let mut work = self.projector();
        let mut out = Matrix::zeros(n, k);
        for j in 0..k {
            let mut best = (0, -1.0);
            for c in 0..n {
                let nrm: f64 = (0..n).map(|i| work[(i, c)] * work[(i, c)]).sum();
                if nrm > best.1 * (1.0 + 1e-12) {
                    best = (c, nrm);
                }
            }
            let inv = 1.0 / libm::sqrt(best.1);
            let q: alloc::vec::Vec<f64> = (0..n).map(|i| work[(i, best.0)] * inv).collect();
            for c in 0..n {
                let dot: f64 = (0..n).map(|i| q[i] * work[(i, c)]).sum();
                for (i, qi) in q.iter().enumerate() {
                    work[(i, c)] -= dot * qi;
                }
            }
            for (i, qi) in q.iter().enumerate() {
                out[(i, j)] = *qi;
            }
        }
        Subspace::from_orthonormal(out)
    }

    fn check_ambient(&self, other: &Subspace) -> Result<()> {
        if self.ambient_dim() != other.ambient_dim() {
            return Err(input_err!(
                "subspaces live in ℝ^{} and ℝ^{}",
                self.ambient_dim(),
                other.ambient_dim()
            ));
        }
        Ok(())
    }

    /// `other ⊆ self`, decided by the rank of the concatenated bases.
    pub fn contains(&self, other: &Subspace, tol: f64) -> Result<bool> {
        self.check_ambient(other)?;
        if other.is_zero() {
            return Ok(true);
        }
        if self.dim() < other.dim() {
            return Ok(false);
        }
        Ok(rank(&self.basis.hstack(&other.basis), tol)? == self.dim())
    }

    pub fn equals(&self, other: &Subspace, tol: f64) -> Result<bool> {
        Ok(self.dim() == other.dim() && self.contains(other, tol)? && other.contains(self, tol)?)
    }

    pub fn sum(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        self.check_ambient(other)?;
        Subspace::span(&self.basis.hstack(&other.basis), tol)
    }

    pub fn intersection(&self, other: &Subspace, tol: f64) -> Result<Subspace> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Subspace::zero(self.ambient_dim()));
        }
        // x = U a = V b  <=>  [U  -V] [a; b] = 0
        let stacked = self.basis.hstack(&(-&other.basis));
        let null = Subspace::kernel(&stacked, tol)?;
        if null.is_zero() {
            return Ok(Subspace::zero(self.ambient_dim()));
        }
        let coeffs = null.basis().rows_range(0, self.dim());
        Subspace::span(&(&self.basis * &coeffs), tol)
    }

    pub fn relations(&self, other: &Subspace, tol: f64) -> Result<SubspaceRelations> {
        let contains = self.contains(other, tol)?;
        let equal = contains && other.contains(self, tol)?;
        Ok(SubspaceRelations {
            sum: self.sum(other, tol)?,
            intersection: self.intersection(other, tol)?,
            contains,
            equal,
        })
    }
}

/// All of [`Subspace`]'s pairwise relations in one call.
pub fn subspace_ops(u: &Subspace, v: &Subspace, tol: f64) -> Result<SubspaceRelations> {
    u.relations(v, tol)
}
