use super::matrix::SymplecticMatrix;
use crate::linalg::{max_abs, to_complex, RMat};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

type Evaluator = Arc<dyn Fn(f64) -> RMat + Send + Sync>;

/// Continuous curve `t ↦ S(t)` in `Sp(2n)` on `[t₀, t₁]`, given by an
/// evaluator together with a validated grid of samples.
#[derive(Clone)]
pub struct SymplecticPath {
    t0: f64,
    t1: f64,
    dim: usize,
    eval: Evaluator,
    samples: Vec<(f64, SymplecticMatrix)>,
}

impl fmt::Debug for SymplecticPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SymplecticPath")
            .field("t0", &self.t0)
            .field("t1", &self.t1)
            .field("dim", &self.dim)
            .field("samples", &self.samples.len())
            .finish()
    }
}

impl SymplecticPath {
    /// Samples `f` at `n_samples ≥ 2` uniform times and validates each one.
    pub fn from_fn<F>(t0: f64, t1: f64, n_samples: usize, f: F) -> Result<Self>
    where
        F: Fn(f64) -> RMat + Send + Sync + 'static,
    {
        Self::from_evaluator(t0, t1, n_samples, Arc::new(f))
    }

    fn from_evaluator(t0: f64, t1: f64, n_samples: usize, eval: Evaluator) -> Result<Self> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::InvalidInput(format!("path interval [{t0}, {t1}] must be finite and increasing")));
        }
        let n_samples = n_samples.max(2);
        let mut samples = Vec::with_capacity(n_samples);
        let mut dim = None;
        for i in 0..n_samples {
            let t = t0 + (t1 - t0) * i as f64 / (n_samples - 1) as f64;
            let s = SymplecticMatrix::new(eval(t))?;
            match dim {
                None => dim = Some(s.dim()),
                Some(d) if d != s.dim() => {
                    return Err(Error::DimensionMismatch(format!("path changes dimension at t = {t}")));
                }
                _ => {}
            }
            samples.push((t, s));
        }
        Ok(Self { t0, t1, dim: dim.unwrap_or(0), eval, samples })
    }

    /// The constant path at `s`.
    pub fn constant(s: SymplecticMatrix, t0: f64, t1: f64) -> Result<Self> {
        let m = s.into_matrix();
        Self::from_fn(t0, t1, 2, move |_| m.clone())
    }

    pub fn start(&self) -> f64 {
        self.t0
    }

    pub fn end(&self) -> f64 {
        self.t1
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn samples(&self) -> &[(f64, SymplecticMatrix)] {
        &self.samples
    }

    /// `S(t)`, with `t` clamped to the parameter interval.
    pub fn eval(&self, t: f64) -> RMat {
        (self.eval)(t.clamp(self.t0, self.t1))
    }

    /// Follows `self`, then `other` shifted to start at `self.end()`.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch(format!("cannot join paths in dimensions {} and {}", self.dim, other.dim)));
        }
        let a = self.eval(self.t1);
        let b = other.eval(other.t0);
        let gap = max_abs(&(&a - &b));
        if gap > 1e-8 * max_abs(&a).max(1.0) {
            return Err(Error::InvalidInput(format!("paths do not join: endpoint gap {gap:e}")));
        }
        let (e1, e2) = (self.eval.clone(), other.eval.clone());
        let (mid, shift) = (self.t1, other.t0 - self.t1);
        let t1 = self.t1 + (other.t1 - other.t0);
        let n = self.samples.len() + other.samples.len() - 1;
        Self::from_evaluator(self.t0, t1, n, Arc::new(move |t| if t <= mid { e1(t) } else { e2(t + shift) }))
    }

    /// The same curve traversed backwards on the same interval.
    pub fn reverse(&self) -> Self {
        let e = self.eval.clone();
        let (t0, t1) = (self.t0, self.t1);
        let samples = self.samples.iter().rev().map(|(t, s)| (t0 + t1 - t, s.clone())).collect();
        Self { t0, t1, dim: self.dim, eval: Arc::new(move |t| e(t0 + t1 - t)), samples }
    }
}

/// Path from `I` to `S` in `Sp(2n)` through the polar decomposition
/// `S = QP`: the unitary part `Q ≅ U ∈ U(n)` follows `exp(t log U)` and the
/// positive part follows `P^t`.
pub fn symplectic_path_from_identity(s: &SymplecticMatrix) -> SymplecticPath {
    let d = s.dim();
    let n = d / 2;
    let m = s.matrix().clone();
    if n == 0 {
        return SymplecticPath::from_fn(0.0, 1.0, 2, |_| RMat::zeros(0, 0)).expect("empty path");
    }
    let eig = (m.transpose() * &m).symmetric_eigen();
    let v = eig.eigenvectors;
    let lam: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(f64::MIN_POSITIVE)).collect();
    let p_pow = move |t: f64| {
        let dgl = RMat::from_diagonal(&nalgebra::DVector::from_iterator(d, lam.iter().map(|l| l.powf(0.5 * t))));
        &v * dgl * v.transpose()
    };
    let q = &m * p_pow(-1.0);
    let a = q.view((0, 0), (n, n)).into_owned();
    let b = q.view((n, 0), (n, n)).into_owned();
    let u = to_complex(&a) + to_complex(&b) * Complex::i();
    let (z, tri) = u.schur().unpack();
    let phases: Vec<f64> = (0..n).map(|k| tri[(k, k)].arg()).collect();
    let z_adj = z.adjoint();
    let eval = move |t: f64| {
        let dgl = nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            n,
            phases.iter().map(|&p| Complex::from_polar(1.0, p * t)),
        ));
        let ut = &z * dgl * &z_adj;
        let mut qt = RMat::zeros(d, d);
        let re = ut.map(|c| c.re);
        let im = ut.map(|c| c.im);
        qt.view_mut((0, 0), (n, n)).copy_from(&re);
        qt.view_mut((n, n), (n, n)).copy_from(&re);
        qt.view_mut((n, 0), (n, n)).copy_from(&im);
        qt.view_mut((0, n), (n, n)).copy_from(&(-im));
        qt * p_pow(t)
    };
    SymplecticPath::from_fn(0.0, 1.0, 33, eval).expect("polar path stays symplectic")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_gives_constant_path() {
        let p = symplectic_path_from_identity(&SymplecticMatrix::identity(2));
        for &(_, ref s) in p.samples() {
            assert!((s.matrix() - RMat::identity(4, 4)).abs().max() < 1e-12);
        }
    }

    #[test]
    fn endpoints_of_rotation_and_hyperbolic_paths() {
        for s in [
            SymplecticMatrix::rotation(2.3),
            SymplecticMatrix::new(RMat::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.5])).unwrap(),
        ] {
            let p = symplectic_path_from_identity(&s);
            assert!((p.eval(1.0) - s.matrix()).abs().max() < 1e-10);
            assert!((p.eval(0.0) - RMat::identity(2, 2)).abs().max() < 1e-12);
        }
        let p = symplectic_path_from_identity(&SymplecticMatrix::rotation(2.3));
        assert!((p.eval(0.5) - SymplecticMatrix::rotation(1.15).matrix()).abs().max() < 1e-10);
    }

    #[test]
    fn random_targets_are_reached() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            let s = SymplecticMatrix::random(n, &mut rng);
            let p = symplectic_path_from_identity(&s);
            assert!((p.eval(1.0) - s.matrix()).abs().max() < 1e-9 * max_abs(s.matrix()).max(1.0));
        }
    }

    #[test]
    fn concat_and_reverse() {
        let a = SymplecticPath::from_fn(0.0, 1.0, 5, |t| SymplecticMatrix::rotation(t).into_matrix()).unwrap();
        let b = SymplecticPath::from_fn(2.0, 3.0, 5, |t| SymplecticMatrix::rotation(t - 1.0).into_matrix()).unwrap();
        let c = a.concat(&b).unwrap();
        assert_eq!(c.end(), 2.0);
        assert!((c.eval(1.5) - SymplecticMatrix::rotation(1.5).matrix()).abs().max() < 1e-14);
        let r = c.reverse();
        assert!((r.eval(0.0) - c.eval(2.0)).abs().max() < 1e-14);
        let gap = SymplecticPath::from_fn(0.0, 1.0, 2, |_| SymplecticMatrix::rotation(0.3).into_matrix()).unwrap();
        assert!(a.concat(&gap).is_err());
    }
}
