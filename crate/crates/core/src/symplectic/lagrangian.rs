use super::matrix::SymplecticMatrix;
use super::signature::signature;
use crate::linalg::{max_abs, orthonormal_columns, rank_ratio, standard_form, RMat};
use crate::{Error, Result};
use alloc::format;

const ISOTROPY_TOL: f64 = 1e-10;
const RANK_TOL: f64 = 1e-8;

/// Symplectic form on the ambient space of a Lagrangian frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbientForm {
    /// `ω` on `T*ℝᴺ`, matrix `J`.
    Standard,
    /// `ω₁ − ω₂` on `T*ℝⁿ × T*ℝⁿ`, matrix `diag(J, −J)`; coordinates are
    /// `(x, ξ, y, η)`.
    Doubled,
}

impl AmbientForm {
    /// Form matrix on an ambient space of dimension `dim`.
    pub fn matrix(self, dim: usize) -> RMat {
        match self {
            AmbientForm::Standard => standard_form(dim / 2),
            AmbientForm::Doubled => {
                let n = dim / 4;
                let j = standard_form(n);
                let mut m = RMat::zeros(dim, dim);
                m.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&j);
                m.view_mut((2 * n, 2 * n), (2 * n, 2 * n)).copy_from(&(-j));
                m
            }
        }
    }
}

/// A Lagrangian subspace given by an orthonormal basis of its span.
#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianFrame {
    basis: RMat,
    form: AmbientForm,
}

impl LagrangianFrame {
    /// Frame in the standard form spanned by the columns of `basis`.
    pub fn new(basis: RMat) -> Result<Self> {
        Self::with_form(basis, AmbientForm::Standard)
    }

    /// Validates isotropy and rank, then stores an orthonormal basis.
    pub fn with_form(basis: RMat, form: AmbientForm) -> Result<Self> {
        let (rows, cols) = basis.shape();
        let multiple = if form == AmbientForm::Doubled { 4 } else { 2 };
        if rows == 0 || rows % multiple != 0 || 2 * cols != rows {
            return Err(Error::DimensionMismatch(format!(
                "Lagrangian frame must be 2N×N in a form of that size, got {rows}×{cols} ({form:?})"
            )));
        }
        let scale = max_abs(&basis);
        let isotropy = max_abs(&(basis.transpose() * form.matrix(rows) * &basis));
        let ratio = rank_ratio(&basis);
        if isotropy > ISOTROPY_TOL * scale * scale || ratio < RANK_TOL {
            return Err(Error::NotLagrangian { isotropy, rank_ratio: ratio });
        }
        Ok(Self { basis: orthonormal_columns(&basis), form })
    }

    /// `{ξ = 0}` in `T*ℝⁿ`.
    pub fn horizontal(n: usize) -> Self {
        let mut b = RMat::zeros(2 * n, n);
        b.view_mut((0, 0), (n, n)).fill_with_identity();
        Self { basis: b, form: AmbientForm::Standard }
    }

    /// `{x = 0}` in `T*ℝⁿ`.
    pub fn vertical(n: usize) -> Self {
        let mut b = RMat::zeros(2 * n, n);
        b.view_mut((n, 0), (n, n)).fill_with_identity();
        Self { basis: b, form: AmbientForm::Standard }
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// `N`, half the ambient dimension.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &RMat {
        &self.basis
    }

    pub fn form(&self) -> AmbientForm {
        self.form
    }

    /// Image under a linear map preserving the ambient form.
    pub fn transform(&self, t: &RMat) -> Result<Self> {
        if t.nrows() != self.ambient_dim() || t.ncols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch(format!(
                "map of size {}×{} applied to a frame in dimension {}",
                t.nrows(),
                t.ncols(),
                self.ambient_dim()
            )));
        }
        Self::with_form(t * &self.basis, self.form)
    }

    /// Smallest singular value of `[B₁ | B₂]` for orthonormal bases; zero
    /// exactly when the two subspaces intersect.
    pub fn transversality(&self, other: &Self) -> f64 {
        let n = self.dim();
        let mut stacked = RMat::zeros(self.ambient_dim(), 2 * n);
        stacked.view_mut((0, 0), (self.ambient_dim(), n)).copy_from(&self.basis);
        stacked.view_mut((0, n), (self.ambient_dim(), n)).copy_from(&other.basis);
        crate::linalg::singular_values(&stacked).last().copied().unwrap_or(0.0)
    }
}

/// Graph `Γ_S = {(Sv, v)}` of `S` in the doubled space with form `ω₁ − ω₂`.
pub fn graph_lagrangian(s: &SymplecticMatrix) -> LagrangianFrame {
    let d = s.dim();
    let mut b = RMat::zeros(2 * d, d);
    b.view_mut((0, 0), (d, d)).copy_from(s.matrix());
    b.view_mut((d, 0), (d, d)).fill_with_identity();
    LagrangianFrame { basis: orthonormal_columns(&b), form: AmbientForm::Doubled }
}

/// Diagonal `Δ = Γ_I` of the doubled space over `T*ℝⁿ`.
pub fn diagonal_frame(n: usize) -> LagrangianFrame {
    graph_lagrangian(&SymplecticMatrix::identity(n))
}

/// `M = {0} ⊕ ℝⁿ ⊕ ℝⁿ ⊕ {0}`: vectors `(0, ξ, y, 0)` in the doubled space.
pub fn mixed_vertical_frame(n: usize) -> LagrangianFrame {
    let mut b = RMat::zeros(4 * n, 2 * n);
    for i in 0..n {
        b[(n + i, i)] = 1.0;
        b[(2 * n + i, n + i)] = 1.0;
    }
    LagrangianFrame { basis: b, form: AmbientForm::Doubled }
}

/// Hörmander–Kashiwara index: signature of
/// `Q(v₁ ⊕ v₂ ⊕ v₃) = ω(v₁, v₂) + ω(v₂, v₃) + ω(v₃, v₁)`.
pub fn hk_index(l1: &LagrangianFrame, l2: &LagrangianFrame, l3: &LagrangianFrame, tol: f64) -> Result<i32> {
    let dim = l1.ambient_dim();
    if l2.ambient_dim() != dim || l3.ambient_dim() != dim || l2.form != l1.form || l3.form != l1.form {
        return Err(Error::DimensionMismatch(format!(
            "HK index needs frames in one ambient space, got dimensions {}, {}, {}",
            dim,
            l2.ambient_dim(),
            l3.ambient_dim()
        )));
    }
    let n = l1.dim();
    let w = l1.form.matrix(dim);
    let b = [&l1.basis, &l2.basis, &l3.basis];
    let mut q = RMat::zeros(3 * n, 3 * n);
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let block = b[i].transpose() * &w * b[j] * 0.5;
        q.view_mut((i * n, j * n), (n, n)).copy_from(&block);
        q.view_mut((j * n, i * n), (n, n)).copy_from(&block.transpose());
    }
    Ok(signature(&q, tol)?.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(x: f64, xi: f64) -> LagrangianFrame {
        LagrangianFrame::new(RMat::from_column_slice(2, 1, &[x, xi])).unwrap()
    }

    #[test]
    fn planar_triple_of_axes_and_diagonal() {
        // Gram form ½[[0, ω(a,b), ω(a,c)], …] with ω(a,b) = ω(b,c) = 1/√2, ω(c,a) = −1
        let a = line(1.0, 0.0);
        let b = line(1.0, 1.0);
        let c = line(0.0, 1.0);
        assert_eq!(hk_index(&a, &b, &c, 1e-8).unwrap(), 1);
        assert_eq!(hk_index(&b, &a, &c, 1e-8).unwrap(), -1);
        assert_eq!(hk_index(&a, &a, &c, 1e-8).unwrap(), 0);
    }

    #[test]
    fn graph_of_identity_and_quarter_turn() {
        let delta = diagonal_frame(1);
        let g = graph_lagrangian(&SymplecticMatrix::identity(1));
        assert!((delta.basis() - g.basis()).abs().max() < 1e-15);
        let j = SymplecticMatrix::new(standard_form(1)).unwrap();
        let gj = graph_lagrangian(&j);
        let w = AmbientForm::Doubled.matrix(4);
        assert!(max_abs(&(gj.basis().transpose() * w * gj.basis())) < 1e-14);
    }

    #[test]
    fn rejects_non_isotropic_frames() {
        let good = RMat::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(LagrangianFrame::new(good).is_ok());
        // e_x1 and e_ξ1 pair to one under ω
        let bad = RMat::from_row_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(LagrangianFrame::new(bad), Err(Error::NotLagrangian { .. })));
        let short = RMat::from_row_slice(4, 1, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(LagrangianFrame::new(short), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn mixed_vertical_frame_is_lagrangian_and_transversal_to_diagonal() {
        let m = mixed_vertical_frame(2);
        let w = AmbientForm::Doubled.matrix(8);
        assert!(max_abs(&(m.basis().transpose() * w * m.basis())) < 1e-15);
        assert!(m.transversality(&diagonal_frame(2)) > 0.1);
    }
}
