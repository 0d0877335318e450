use crate::linalg::{det, expm, max_abs, require_square, standard_form, RMat};
use crate::{Error, Result};
use alloc::format;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;
use rand::Rng;

/// Tolerance factor for `‖SᵀJS − J‖∞ ≤ tol · ‖S‖²∞`.
pub const SYMPLECTIC_TOL: f64 = 1e-10;
/// Relative tolerance on `det S = 1`.
pub const DETERMINANT_TOL: f64 = 1e-8;

/// A linear symplectic map of `T*ℝⁿ` (a `2n × 2n` real matrix with
/// `SᵀJS = J`). The empty `0 × 0` matrix is allowed and stands for the
/// transversal map of a one-degree-of-freedom orbit.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticMatrix {
    m: RMat,
}

impl SymplecticMatrix {
    /// Validates `m` against the symplectic and unit-determinant invariants.
    pub fn new(m: RMat) -> Result<Self> {
        require_square(&m, "symplectic matrix")?;
        if m.nrows() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "symplectic matrix must have even size, got {}",
                m.nrows()
            )));
        }
        let residual = symplectic_residual(&m);
        let scale = max_abs(&m).max(1.0);
        let d = det(&m);
        // Hadamard's bound normalises the determinant check
        let hadamard: f64 = m.column_iter().map(|c| c.norm()).product();
        if residual > SYMPLECTIC_TOL * scale * scale || (d - 1.0).abs() > DETERMINANT_TOL * hadamard.max(1.0) {
            return Err(Error::NotSymplectic { residual, det: d });
        }
        Ok(Self { m })
    }

    /// Wraps without validation; callers guarantee the invariants.
    pub(crate) fn new_unchecked(m: RMat) -> Self {
        Self { m }
    }

    pub fn identity(n: usize) -> Self {
        Self { m: RMat::identity(2 * n, 2 * n) }
    }

    /// Rotation of `T*ℝ` by angle `theta`: `(x, ξ) ↦ (x cos θ − ξ sin θ, x sin θ + ξ cos θ)`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { m: RMat::from_row_slice(2, 2, &[c, -s, s, c]) }
    }

    /// Exponential of the Hamiltonian matrix `J A` for symmetric `A`,
    /// i.e. the time-one map of the quadratic Hamiltonian `½ vᵀ A v`.
    pub fn from_quadratic_hamiltonian(a: &RMat) -> Result<Self> {
        require_square(a, "quadratic Hamiltonian")?;
        let n2 = a.nrows();
        if n2 % 2 != 0 {
            return Err(Error::DimensionMismatch(format!("Hamiltonian must be even-sized, got {n2}")));
        }
        let gen = standard_form(n2 / 2) * ((a + a.transpose()) * 0.5);
        Self::new(expm(&gen))
    }

    /// Random element `exp(J A)` with `A` symmetric and entries uniform in
    /// `[−1, 1]`; covers elliptic and hyperbolic cases.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let a = random_symmetric(2 * n, 1.0, rng);
        let gen = standard_form(n) * a;
        Self::new_unchecked(expm(&gen))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `n` for a map of `T*ℝⁿ`.
    pub fn half_dim(&self) -> usize {
        self.m.nrows() / 2
    }

    pub fn matrix(&self) -> &RMat {
        &self.m
    }

    pub fn into_matrix(self) -> RMat {
        self.m
    }

    /// `S⁻¹ = J⁻¹ Sᵀ J = −J Sᵀ J`.
    pub fn inverse(&self) -> Self {
        let j = standard_form(self.half_dim());
        Self { m: -(&j * self.m.transpose() * &j) }
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { m: &self.m * &other.m }
    }

    /// `S^k` for any integer `k` (negative powers through the inverse).
    pub fn power(&self, k: i32) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        Self { m: crate::linalg::matrix_power(&base.m, k.unsigned_abs()) }
    }

    /// `det(S^k − I)`, equal to 1 for the empty matrix.
    pub fn fixed_point_determinant(&self, k: i32) -> f64 {
        let p = self.power(k);
        let n = self.dim();
        det(&(p.m - RMat::identity(n, n)))
    }

    /// `‖SᵀJS − J‖∞`.
    pub fn residual(&self) -> f64 {
        symplectic_residual(&self.m)
    }
}

/// `‖SᵀJS − J‖∞` for any even-sized square matrix.
pub fn symplectic_residual(m: &RMat) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let j = standard_form(m.nrows() / 2);
    max_abs(&(m.transpose() * &j * m - &j))
}

/// Symmetric matrix with entries uniform in `[−scale, scale]`.
pub fn random_symmetric<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> RMat {
    let mut a = RMat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.random_range(-scale..=scale);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}
