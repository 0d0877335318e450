use crate::linalg::RMat;
use crate::numerics::Polynomial;
use crate::{Error, Result};
use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A classical Hamiltonian on `T*ℝⁿ`, points ordered `(x, ξ)`.
pub trait Hamiltonian: Send + Sync {
    /// Degrees of freedom `n`.
    fn dof(&self) -> usize;
    fn energy(&self, m: &[f64]) -> f64;
    fn gradient(&self, m: &[f64]) -> Vec<f64>;
    fn hessian(&self, m: &[f64]) -> RMat;
}

/// The family `p(m, z) = H(m) − z` with a validated Hamiltonian `H`.
#[derive(Clone)]
pub struct HamiltonianSystem {
    inner: Arc<dyn Hamiltonian>,
    name: String,
}

impl fmt::Debug for HamiltonianSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianSystem").field("name", &self.name).field("dof", &self.dof()).finish()
    }
}

/// Relative agreement required between the gradient and central differences.
pub const GRADIENT_CHECK_TOL: f64 = 1e-6;

impl HamiltonianSystem {
    /// Registers `h` after checking its gradient and Hessian against central
    /// differences at random probes in `[−1, 1]²ⁿ`.
    pub fn new<H: Hamiltonian + 'static>(name: &str, h: H) -> Result<Self> {
        let sys = Self { inner: Arc::new(h), name: String::from(name) };
        sys.self_check(16, 0x9e3779b9)?;
        Ok(sys)
    }

    fn self_check(&self, probes: usize, seed: u64) -> Result<()> {
        let d = 2 * self.dof();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..probes {
            let m: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let g = self.inner.gradient(&m);
            let hess = self.inner.hessian(&m);
            if g.len() != d || hess.shape() != (d, d) {
                return Err(Error::DimensionMismatch(format!("{}: gradient/Hessian sizes do not match 2n = {d}", self.name)));
            }
            let gnorm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
            let hnorm = crate::linalg::max_abs(&hess);
            for i in 0..d {
                let e = 1e-5;
                let mut mp = m.clone();
                let mut mm = m.clone();
                mp[i] += e;
                mm[i] -= e;
                let fd = (self.inner.energy(&mp) - self.inner.energy(&mm)) / (2.0 * e);
                worst = worst.max((fd - g[i]).abs() / gnorm.max(1e-3));
                let gp = self.inner.gradient(&mp);
                let gm = self.inner.gradient(&mm);
                for j in 0..d {
                    let fdh = (gp[j] - gm[j]) / (2.0 * e);
                    worst = worst.max((fdh - hess[(j, i)]).abs() / hnorm.max(1e-3));
                }
            }
        }
        if worst > GRADIENT_CHECK_TOL {
            return Err(Error::GradientMismatch { relative_error: worst });
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dof(&self) -> usize {
        self.inner.dof()
    }

    /// `p(m, z) = H(m) − z`.
    pub fn p(&self, m: &[f64], z: f64) -> f64 {
        self.inner.energy(m) - z
    }

    pub fn energy(&self, m: &[f64]) -> f64 {
        self.inner.energy(m)
    }

    /// `σ(∂_z P(z))`, identically −1 for this family.
    pub fn dp_dz(&self, _m: &[f64], _z: f64) -> f64 {
        -1.0
    }

    pub fn gradient(&self, m: &[f64]) -> Vec<f64> {
        self.inner.gradient(m)
    }

    pub fn hessian(&self, m: &[f64]) -> RMat {
        self.inner.hessian(m)
    }

    /// `H_p = (∂_ξ p, −∂_x p)`.
    pub fn hamilton_field(&self, m: &[f64]) -> Vec<f64> {
        let n = self.dof();
        let g = self.inner.gradient(m);
        let mut v = vec![0.0; 2 * n];
        for i in 0..n {
            v[i] = g[n + i];
            v[n + i] = -g[i];
        }
        v
    }
}

/// `Σᵢ (ξᵢ² + ωᵢ² xᵢ²)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Oscillator {
    pub omega: Vec<f64>,
}

impl Hamiltonian for Oscillator {
    fn dof(&self) -> usize {
        self.omega.len()
    }

    fn energy(&self, m: &[f64]) -> f64 {
        let n = self.dof();
        (0..n).map(|i| 0.5 * (m[n + i] * m[n + i] + self.omega[i] * self.omega[i] * m[i] * m[i])).sum()
    }

    fn gradient(&self, m: &[f64]) -> Vec<f64> {
        let n = self.dof();
        let mut g = vec![0.0; 2 * n];
        for i in 0..n {
            g[i] = self.omega[i] * self.omega[i] * m[i];
            g[n + i] = m[n + i];
        }
        g
    }

    fn hessian(&self, _m: &[f64]) -> RMat {
        let n = self.dof();
        let mut h = RMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            h[(i, i)] = self.omega[i] * self.omega[i];
            h[(n + i, n + i)] = 1.0;
        }
        h
    }
}

/// `ξ² + V(x)` in one degree of freedom with polynomial `V`.
#[derive(Debug, Clone, PartialEq)]
pub struct Well1d {
    pub potential: Polynomial,
}

impl Hamiltonian for Well1d {
    fn dof(&self) -> usize {
        1
    }

    fn energy(&self, m: &[f64]) -> f64 {
        m[1] * m[1] + self.potential.eval(m[0])
    }

    fn gradient(&self, m: &[f64]) -> Vec<f64> {
        vec![self.potential.eval_derivative(1, m[0]), 2.0 * m[1]]
    }

    fn hessian(&self, m: &[f64]) -> RMat {
        RMat::from_row_slice(2, 2, &[self.potential.eval_derivative(2, m[0]), 0.0, 0.0, 2.0])
    }
}

/// `(ξ₁² + ξ₂²)/2 + (x₁² + 2x₂²)/2 + x₁⁴/4 + ε x₁² x₂²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Anharmonic2d {
    pub eps: f64,
}

impl Hamiltonian for Anharmonic2d {
    fn dof(&self) -> usize {
        2
    }

    fn energy(&self, m: &[f64]) -> f64 {
        let (x1, x2, p1, p2) = (m[0], m[1], m[2], m[3]);
        0.5 * (p1 * p1 + p2 * p2) + 0.5 * (x1 * x1 + 2.0 * x2 * x2) + 0.25 * x1.powi(4) + self.eps * x1 * x1 * x2 * x2
    }

    fn gradient(&self, m: &[f64]) -> Vec<f64> {
        let (x1, x2, p1, p2) = (m[0], m[1], m[2], m[3]);
        vec![
            x1 + x1.powi(3) + 2.0 * self.eps * x1 * x2 * x2,
            2.0 * x2 + 2.0 * self.eps * x1 * x1 * x2,
            p1,
            p2,
        ]
    }

    fn hessian(&self, m: &[f64]) -> RMat {
        let (x1, x2) = (m[0], m[1]);
        let e = self.eps;
        RMat::from_row_slice(
            4,
            4,
            &[
                1.0 + 3.0 * x1 * x1 + 2.0 * e * x2 * x2,
                4.0 * e * x1 * x2,
                0.0,
                0.0,
                4.0 * e * x1 * x2,
                2.0 + 2.0 * e * x1 * x1,
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
                0.0,
                0.0,
                0.0,
                0.0,
                1.0,
            ],
        )
    }
}

type ScalarFn = Box<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
type MatrixFn = Box<dyn Fn(&[f64]) -> RMat + Send + Sync>;

/// Hamiltonian assembled from closures.
pub struct FnHamiltonian {
    dof: usize,
    energy: ScalarFn,
    gradient: VectorFn,
    hessian: MatrixFn,
}

impl FnHamiltonian {
    pub fn new(
        dof: usize,
        energy: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static,
        hessian: impl Fn(&[f64]) -> RMat + Send + Sync + 'static,
    ) -> Self {
        Self { dof, energy: Box::new(energy), gradient: Box::new(gradient), hessian: Box::new(hessian) }
    }
}

impl Hamiltonian for FnHamiltonian {
    fn dof(&self) -> usize {
        self.dof
    }

    fn energy(&self, m: &[f64]) -> f64 {
        (self.energy)(m)
    }

    fn gradient(&self, m: &[f64]) -> Vec<f64> {
        (self.gradient)(m)
    }

    fn hessian(&self, m: &[f64]) -> RMat {
        (self.hessian)(m)
    }
}
