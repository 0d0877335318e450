use super::flow::{FlowIntegrator, FlowOptions};
use super::hamiltonian::HamiltonianSystem;
use super::reduce::{check_frame_along, orbit_maslov_parts, reduce_monodromy_at, turning_points};
use crate::linalg::RMat;
use crate::numerics::find_root;
use crate::symplectic::{MaslovOptions, SymplecticMatrix};
use crate::{Error, Result};
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// How transversal frames `Φ_t` are attached along the orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FrameConvention {
    /// Fixed coordinate vectors projected onto the symplectic complement
    /// of `span{H_p, ∇p}` followed by symplectic Gram–Schmidt, with the
    /// pivot order chosen at the base point. Periodic along the orbit.
    #[default]
    ProjectedCoordinates,
}

/// Hyperplane section `{⟨n, m − m_b⟩ = 0}` crossed in the direction of the
/// flow at its base point.
#[derive(Debug, Clone, PartialEq)]
pub struct SectionSpec {
    base: Vec<f64>,
    normal: Vec<f64>,
    direction: f64,
    frame: FrameConvention,
}

/// Minimal `|⟨n, H_p⟩| / ‖H_p‖` at the base point.
pub const SECTION_TRANSVERSALITY: f64 = 1e-6;

impl SectionSpec {
    pub fn new(sys: &HamiltonianSystem, base: Vec<f64>, normal: Vec<f64>) -> Result<Self> {
        let d = 2 * sys.dof();
        if base.len() != d || normal.len() != d {
            return Err(Error::DimensionMismatch(format!("section vectors must have length {d}")));
        }
        let v = sys.hamilton_field(&base);
        let vn = norm(&v);
        let dot: f64 = v.iter().zip(&normal).map(|(a, b)| a * b).sum();
        let ratio = if vn > 0.0 { dot.abs() / (vn * norm(&normal)) } else { 0.0 };
        if !(ratio >= SECTION_TRANSVERSALITY) {
            return Err(Error::DegenerateSection { ratio });
        }
        Ok(Self { base, normal, direction: dot.signum(), frame: FrameConvention::default() })
    }

    pub fn base(&self) -> &[f64] {
        &self.base
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    pub fn frame(&self) -> FrameConvention {
        self.frame
    }

    /// `⟨n, m − m_b⟩`.
    pub fn offset(&self, m: &[f64]) -> f64 {
        self.normal.iter().zip(m).zip(&self.base).map(|((n, x), b)| n * (x - b)).sum()
    }

    /// Offset signed so that it increases through zero along the flow.
    fn oriented(&self, m: &[f64]) -> f64 {
        self.direction * self.offset(m)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Closed-orbit search settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrbitOptions {
    /// Integrator tolerance per unit time.
    pub flow_tol: f64,
    /// Required closure defect `‖Φ_T(m₀) − m₀‖∞`, energy and section residuals.
    pub orbit_tol: f64,
    pub max_newton: usize,
    /// Uniform trajectory samples per period.
    pub samples: usize,
    /// Repetitions `N` for which Maslov indices are computed.
    pub repetitions: i32,
    /// Maximal time to wait for a return; estimated from the Hessian when `None`.
    pub return_budget: Option<f64>,
    pub maslov: MaslovOptions,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            flow_tol: 1e-12,
            orbit_tol: 1e-9,
            max_newton: 50,
            samples: 256,
            repetitions: 3,
            return_budget: None,
            maslov: MaslovOptions::default(),
        }
    }
}

/// A trajectory sample with the variational matrix from `t = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSample {
    pub t: f64,
    pub point: Vec<f64>,
    pub variational: RMat,
}

/// A numerically converged periodic trajectory.
#[derive(Debug, Clone)]
pub struct ClosedOrbit {
    pub(crate) system: HamiltonianSystem,
    pub(crate) energy: f64,
    pub(crate) point: Vec<f64>,
    pub(crate) period: f64,
    pub(crate) action: f64,
    pub(crate) samples: Arc<Vec<OrbitSample>>,
    pub(crate) monodromy: SymplecticMatrix,
    pub(crate) reduced: SymplecticMatrix,
    pub(crate) maslov: Vec<(i32, i32)>,
    pub(crate) transversal_maslov: Vec<(i32, i32)>,
    pub(crate) turning_points: usize,
    pub(crate) residual: f64,
    pub(crate) newton_steps: usize,
    pub(crate) section: SectionSpec,
    pub(crate) flow_tol: f64,
}

impl ClosedOrbit {
    pub fn system(&self) -> &HamiltonianSystem {
        &self.system
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    /// Base point `m₀` on the section.
    pub fn point(&self) -> &[f64] {
        &self.point
    }

    /// Primitive period `T`.
    pub fn period(&self) -> f64 {
        self.period
    }

    /// `∮ ξ·dx`.
    pub fn action(&self) -> f64 {
        self.action
    }

    /// Uniform samples on `[0, T]`, both ends included.
    pub fn samples(&self) -> &[OrbitSample] {
        &self.samples
    }

    /// `DΦ_T(m₀)`.
    pub fn monodromy(&self) -> &SymplecticMatrix {
        &self.monodromy
    }

    /// Linearised Poincaré map `dC` on the transversal symplectic space.
    pub fn reduced_monodromy(&self) -> &SymplecticMatrix {
        &self.reduced
    }

    /// `ν_k` for `1 ≤ |k| ≤ N`, including the longitudinal turning-point term.
    pub fn maslov(&self, k: i32) -> Option<i32> {
        self.maslov.iter().find(|(j, _)| *j == k).map(|&(_, v)| v)
    }

    pub fn maslov_table(&self) -> &[(i32, i32)] {
        &self.maslov
    }

    /// Maslov index of the reduced transversal path alone.
    pub fn transversal_maslov(&self, k: i32) -> Option<i32> {
        self.transversal_maslov.iter().find(|(j, _)| *j == k).map(|&(_, v)| v)
    }

    /// Sign changes of the velocity along its principal direction per period.
    pub fn turning_points(&self) -> usize {
        self.turning_points
    }

    /// `‖Φ_T(m₀) − m₀‖∞`.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn newton_steps(&self) -> usize {
        self.newton_steps
    }

    pub fn section(&self) -> &SectionSpec {
        &self.section
    }

    pub fn flow_tol(&self) -> f64 {
        self.flow_tol
    }

    /// Largest `‖MᵀJM − J‖∞` over the stored variational samples.
    pub fn symplectic_defect(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| crate::symplectic::symplectic_residual(&s.variational))
            .fold(0.0, f64::max)
    }
}

/// Time budget `10 · 2π / ω_max`, with `ω_max` the spectral radius of
/// `J Hess p` at `m` (falling back to `‖H_p‖ / (1 + ‖m‖)`).
fn default_budget(sys: &HamiltonianSystem, m: &[f64]) -> f64 {
    let n = sys.dof();
    let hess = sys.hessian(m);
    let mut jh = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        jh.row_mut(i).copy_from(&hess.row(n + i));
        jh.row_mut(n + i).copy_from(&(-hess.row(i)));
    }
    let rho = jh.complex_eigenvalues().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let fallback = norm(&sys.hamilton_field(m)) / (1.0 + norm(m));
    let w = rho.max(fallback);
    if w > 1e-8 {
        10.0 * core::f64::consts::TAU / w
    } else {
        1e4
    }
}

/// First time `t > 0` at which the trajectory through `m` crosses the
/// section in the flow direction, with the state there.
pub fn first_return(
    sys: &HamiltonianSystem,
    m: &[f64],
    section: &SectionSpec,
    budget: f64,
    opts: FlowOptions,
) -> Result<(f64, Vec<f64>, RMat)> {
    let mut it = FlowIntegrator::new(sys, m, opts);
    let mut armed = false;
    loop {
        let before = it.clone();
        let g0 = section.oriented(it.point());
        it.step_toward(budget)?;
        let g1 = section.oriented(it.point());
        if armed && g0 < 0.0 && g1 >= 0.0 {
            let eval = |tau: f64| {
                let mut probe = before.clone();
                match probe.advance_to(tau) {
                    Ok(()) => section.oriented(probe.point()),
                    Err(_) => f64::NAN,
                }
            };
            let t = find_root(eval, before.time(), it.time(), 1e-15).unwrap_or(it.time());
            let mut at = before.clone();
            at.advance_to(t)?;
            return Ok((t, at.point().to_vec(), at.variational()));
        }
        if g1 < 0.0 {
            armed = true;
        }
        if it.time() >= budget {
            return Err(Error::NoReturn { budget });
        }
    }
}

/// Newton search for a periodic orbit of `H_p` on `{p = 0}` through the
/// section, starting near `guess`.
pub fn find_closed_orbit(
    sys: &HamiltonianSystem,
    z: f64,
    guess: &[f64],
    section: &SectionSpec,
    opts: &OrbitOptions,
) -> Result<ClosedOrbit> {
    let n = sys.dof();
    let d = 2 * n;
    if guess.len() != d {
        return Err(Error::DimensionMismatch(format!("guess must have length {d}")));
    }
    let flow = FlowOptions::with_tol(opts.flow_tol);
    let budget = opts.return_budget.unwrap_or_else(|| default_budget(sys, guess));
    let mut m = guess.to_vec();
    if section.offset(&m).abs() > opts.orbit_tol {
        m = first_return(sys, &m, section, budget, flow)?.1;
    }
    let mut period = first_return(sys, &m, section, budget, flow)?.0;

    let residual = |m: &[f64], t: f64| -> Result<(Vec<f64>, RMat, Vec<f64>)> {
        let mut it = FlowIntegrator::new(sys, m, flow);
        it.advance_to(t)?;
        let phi = it.point().to_vec();
        let mut r: Vec<f64> = phi.iter().zip(m).map(|(a, b)| a - b).collect();
        r.push(section.offset(m));
        r.push(sys.p(m, z));
        Ok((phi, it.variational(), r))
    };
    let size = |r: &[f64]| r.iter().fold(0.0f64, |a, b| a.max(b.abs()));

    let mut steps = 0;
    let (mut phi, mut var, mut r) = residual(&m, period)?;
    while size(&r) > opts.orbit_tol {
        if steps >= opts.max_newton {
            return Err(Error::NewtonDiverged { iterations: steps, residual: size(&r) });
        }
        let mut jac = RMat::zeros(d + 2, d + 1);
        let v = sys.hamilton_field(&phi);
        let g = sys.gradient(&m);
        for i in 0..d {
            for j in 0..d {
                jac[(i, j)] = var[(i, j)] - if i == j { 1.0 } else { 0.0 };
            }
            jac[(i, d)] = v[i];
            jac[(d, i)] = section.normal[i];
            jac[(d + 1, i)] = g[i];
        }
        let rhs = nalgebra::DVector::from_iterator(d + 2, r.iter().map(|x| -x));
        let delta = jac
            .svd(true, true)
            .solve(&rhs, 1e-14)
            .map_err(|_| Error::NewtonDiverged { iterations: steps, residual: size(&r) })?;
        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = (0..d).map(|i| m[i] + lambda * delta[i]).collect();
            let t_trial = period + lambda * delta[d];
            if t_trial > 0.0 {
                if let Ok((p2, v2, r2)) = residual(&trial, t_trial) {
                    if size(&r2) < size(&r) {
                        m = trial;
                        period = t_trial;
                        phi = p2;
                        var = v2;
                        r = r2;
                        break;
                    }
                }
            }
            lambda *= 0.5;
            if lambda < 1e-10 {
                return Err(Error::NewtonDiverged { iterations: steps, residual: size(&r) });
            }
        }
        steps += 1;
    }
    build_orbit(sys, z, m, period, section.clone(), steps, opts)
}

fn build_orbit(
    sys: &HamiltonianSystem,
    z: f64,
    m: Vec<f64>,
    period: f64,
    section: SectionSpec,
    newton_steps: usize,
    opts: &OrbitOptions,
) -> Result<ClosedOrbit> {
    let g = sys.gradient(&m);
    let gradient_norm = norm(&g);
    if gradient_norm < 1e-10 {
        return Err(Error::NotPrincipalType { gradient_norm });
    }
    let count = opts.samples.max(16);
    let mut it = FlowIntegrator::new(sys, &m, FlowOptions::with_tol(opts.flow_tol));
    let mut samples = Vec::with_capacity(count + 1);
    for j in 0..=count {
        let t = period * j as f64 / count as f64;
        it.advance_to(t)?;
        samples.push(OrbitSample { t, point: it.point().to_vec(), variational: it.variational() });
    }
    let end = samples.last().expect("samples");
    let residual = end.point.iter().zip(&m).fold(0.0f64, |a, (x, y)| a.max((x - y).abs()));
    let monodromy = SymplecticMatrix::new_unchecked(end.variational.clone());
    let action = trajectory_action(sys, &samples, period);
    let samples = Arc::new(samples);
    check_frame_along(sys, &samples)?;
    let reduced = reduce_monodromy_at(sys, &m, &monodromy)?;
    let mut orbit = ClosedOrbit {
        system: sys.clone(),
        energy: z,
        point: m,
        period,
        action,
        samples,
        monodromy,
        reduced,
        maslov: Vec::new(),
        transversal_maslov: Vec::new(),
        turning_points: 0,
        residual,
        newton_steps,
        section,
        flow_tol: opts.flow_tol,
    };
    orbit.turning_points = turning_points(&orbit);
    for k in (-opts.repetitions..=opts.repetitions).filter(|&k| k != 0) {
        let (transversal, total) = orbit_maslov_parts(&orbit, k, &opts.maslov)?;
        orbit.transversal_maslov.push((k, transversal));
        orbit.maslov.push((k, total));
    }
    Ok(orbit)
}

/// Periodic trapezoid rule for `∫₀ᵀ ξ·∂_ξ p dt` (spectrally accurate).
fn trajectory_action(sys: &HamiltonianSystem, samples: &[OrbitSample], period: f64) -> f64 {
    let n = sys.dof();
    let count = samples.len() - 1;
    let mut sum = 0.0;
    for s in &samples[..count] {
        let v = sys.hamilton_field(&s.point);
        sum += (0..n).map(|i| s.point[n + i] * v[i]).sum::<f64>();
    }
    sum * period / count as f64
}

/// `I = ∮ ξ·dx` recomputed from the stored trajectory.
pub fn orbit_action(orbit: &ClosedOrbit) -> f64 {
    trajectory_action(&orbit.system, &orbit.samples, orbit.period)
}
