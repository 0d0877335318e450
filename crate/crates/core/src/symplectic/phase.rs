use super::matrix::{random_symmetric, SymplecticMatrix};
use crate::linalg::{det, RMat};
use crate::{Error, Result};
use alloc::format;
use rand::Rng;

/// Smallest admissible `|det φ''_xη|`.
pub const GRAPH_DET_TOL: f64 = 1e-8;

/// `φ(x, η) = φ₀ + ½⟨αx, x⟩ + ⟨βη, x⟩ + ½⟨γη, η⟩`, critical at the origin
/// when `φ₀` is read as the critical value.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticPhase {
    alpha: RMat,
    beta: RMat,
    gamma: RMat,
    value0: f64,
}

impl QuadraticPhase {
    pub fn new(alpha: RMat, beta: RMat, gamma: RMat, value0: f64) -> Result<Self> {
        let n = beta.nrows();
        for (name, m) in [("α", &alpha), ("β", &beta), ("γ", &gamma)] {
            if m.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!("{name} must be {n}×{n}, got {:?}", m.shape())));
            }
        }
        for m in [&alpha, &gamma] {
            if m != &m.transpose() {
                return Err(Error::NotSymmetric { residual: crate::linalg::symmetry_residual(m) });
            }
        }
        let d = det(&beta);
        if n == 0 || d.abs() < GRAPH_DET_TOL {
            return Err(Error::PhaseNotGraphLike { det_beta: d });
        }
        Ok(Self { alpha, beta, gamma, value0 })
    }

    /// One-dimensional phase from scalar blocks.
    pub fn scalar(alpha: f64, beta: f64, gamma: f64, value0: f64) -> Result<Self> {
        let m = |v| RMat::from_element(1, 1, v);
        Self::new(m(alpha), m(beta), m(gamma), value0)
    }

    /// Random phase with symmetric blocks uniform in `[−1, 1]` (β general)
    /// and `|det β| ≥ min_det`, rejecting samples until both hold.
    pub fn random<R: Rng + ?Sized>(n: usize, min_det: f64, rng: &mut R) -> Self {
        loop {
            let alpha = random_symmetric(n, 1.0, rng);
            let gamma = random_symmetric(n, 1.0, rng);
            let beta = RMat::from_fn(n, n, |_, _| rng.random_range(-1.0..=1.0));
            if det(&beta).abs() >= min_det.max(GRAPH_DET_TOL) {
                return Self { alpha, beta, gamma, value0: rng.random_range(-1.0..=1.0) };
            }
        }
    }

    pub fn n(&self) -> usize {
        self.beta.nrows()
    }

    /// `φ''_xx`.
    pub fn alpha(&self) -> &RMat {
        &self.alpha
    }

    /// `φ''_xη`.
    pub fn beta(&self) -> &RMat {
        &self.beta
    }

    /// `φ''_ηη`.
    pub fn gamma(&self) -> &RMat {
        &self.gamma
    }

    pub fn value0(&self) -> f64 {
        self.value0
    }

    pub fn with_value0(&self, value0: f64) -> Self {
        Self { value0, ..self.clone() }
    }

    pub fn value(&self, x: &[f64], eta: &[f64]) -> f64 {
        let n = self.n();
        let mut v = self.value0;
        for i in 0..n {
            for j in 0..n {
                v += 0.5 * self.alpha[(i, j)] * x[i] * x[j]
                    + self.beta[(i, j)] * x[i] * eta[j]
                    + 0.5 * self.gamma[(i, j)] * eta[i] * eta[j];
            }
        }
        v
    }

    /// Hessian of `φ(x, η) − ⟨x, η⟩`: `[[α, β − I], [βᵀ − I, γ]]`.
    pub fn fixed_point_hessian(&self) -> RMat {
        let n = self.n();
        let id = RMat::identity(n, n);
        let mut h = RMat::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.alpha);
        h.view_mut((0, n), (n, n)).copy_from(&(&self.beta - &id));
        h.view_mut((n, 0), (n, n)).copy_from(&(self.beta.transpose() - &id));
        h.view_mut((n, n), (n, n)).copy_from(&self.gamma);
        h
    }
}

/// Differential at the origin of the canonical map generated by `φ`,
/// `(φ'_η(x, η), η) ↦ (x, φ'_x(x, η))`:
/// `[[β⁻ᵀ, −β⁻ᵀγ], [αβ⁻ᵀ, β − αβ⁻ᵀγ]]`.
pub fn dkappa_from_phase(phi: &QuadraticPhase) -> Result<SymplecticMatrix> {
    let n = phi.n();
    let bt_inv = phi
        .beta
        .transpose()
        .try_inverse()
        .ok_or(Error::PhaseNotGraphLike { det_beta: det(&phi.beta) })?;
    let a = &bt_inv;
    let b = -(&bt_inv * &phi.gamma);
    let c = &phi.alpha * &bt_inv;
    let d = &phi.beta - &phi.alpha * &bt_inv * &phi.gamma;
    let mut m = RMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(a);
    m.view_mut((0, n), (n, n)).copy_from(&b);
    m.view_mut((n, 0), (n, n)).copy_from(&c);
    m.view_mut((n, n), (n, n)).copy_from(&d);
    SymplecticMatrix::new(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_phase_generates_identity() {
        let phi = QuadraticPhase::scalar(0.0, 1.0, 0.0, 0.0).unwrap();
        let k = dkappa_from_phase(&phi).unwrap();
        assert_eq!(k.matrix(), &RMat::identity(2, 2));
    }

    #[test]
    fn rejects_singular_mixed_block() {
        assert!(matches!(
            QuadraticPhase::scalar(1.0, 0.0, 1.0, 0.0),
            Err(Error::PhaseNotGraphLike { .. })
        ));
    }

    #[test]
    fn matches_finite_differences_of_canonical_map() {
        // φ = xη + (x² + η²)/2: (y, η) = (x + η, η) ↦ (x, ξ) = (y − η, x + η)
        let phi = QuadraticPhase::scalar(1.0, 1.0, 1.0, 0.0).unwrap();
        let k = dkappa_from_phase(&phi).unwrap();
        let map = |y: f64, eta: f64| {
            let x = y - eta;
            (x, x + eta)
        };
        let e = 1e-5;
        let col = |dy: f64, de: f64| {
            let (p1, q1) = map(dy * e, de * e);
            let (p0, q0) = map(-dy * e, -de * e);
            ((p1 - p0) / (2.0 * e), (q1 - q0) / (2.0 * e))
        };
        let (a, c) = col(1.0, 0.0);
        let (b, d) = col(0.0, 1.0);
        let fd = RMat::from_row_slice(2, 2, &[a, b, c, d]);
        assert!((k.matrix() - fd).abs().max() < 1e-6);
    }
}
