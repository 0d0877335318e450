use crate::linalg::{det, RMat};
use crate::symplectic::{dkappa_from_phase, signature, QuadraticPhase, DEFAULT_SIGNATURE_TOL};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// `|det(dκ − I)|` below this is a degenerate fixed point.
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Minimal grid points per local period of the phase.
pub const POINTS_PER_PERIOD: f64 = 10.0;

/// Leading stationary-phase value of `tr B` for the operator with phase `φ`
/// and amplitude `b₀` at the origin:
/// `i^{s/2} b₀ e^{iφ(0,0)/h} / |det β · det(dκ − I)|^{1/2}`, where `s` is the
/// signature of the Hessian of `φ(x, η) − ⟨x, η⟩`.
pub fn fio_trace_sp(phi: &QuadraticPhase, b0: Complex, h: f64) -> Result<Complex> {
    if !(h > 0.0) {
        return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
    }
    let n = phi.n();
    let dk = dkappa_from_phase(phi)?;
    let fixed = det(&(dk.matrix() - RMat::identity(2 * n, 2 * n)));
    if fixed.abs() < FIXED_POINT_TOL {
        return Err(Error::DegenerateFixedPoint { det: fixed });
    }
    let s = signature(&phi.fixed_point_hessian(), DEFAULT_SIGNATURE_TOL)?.value();
    let modulus = (det(phi.beta()) * fixed).abs().sqrt();
    Ok(b0 * Complex::from_polar(1.0 / modulus, 0.25 * PI * s as f64 + phi.value0() / h))
}

/// Tensor grid of `points` nodes per axis on `[−half_width, half_width]`
/// in each of the `2n` variables `(x, η)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FioGrid {
    pub half_width: f64,
    pub points: usize,
}

impl FioGrid {
    /// Smallest grid on `[−half_width, half_width]` that resolves the phase.
    pub fn resolving(phi: &QuadraticPhase, h: f64, half_width: f64) -> Self {
        Self { half_width, points: required_points(phi, h, half_width) }
    }
}

/// Grid points per axis for `POINTS_PER_PERIOD` samples of the fastest
/// local oscillation, bounded by `|∇Φ| ≤ ‖Φ″‖ · R √(2n)` on the box.
fn required_points(phi: &QuadraticPhase, h: f64, half_width: f64) -> usize {
    let norm = phi.fixed_point_hessian().svd(false, false).singular_values.max();
    let gradient = norm * half_width * ((2 * phi.n()) as f64).sqrt();
    (POINTS_PER_PERIOD * 2.0 * half_width * gradient / (2.0 * PI * h)).ceil() as usize + 1
}

/// `(2πh)^{−n} ∫∫ e^{i(φ(x,η) − ⟨x,η⟩)/h} b(x, η) dx dη` by the trapezoid
/// rule; `b` must vanish on the boundary of the box.
pub fn fio_trace_quadrature<B>(phi: &QuadraticPhase, b: B, h: f64, grid: &FioGrid) -> Result<Complex>
where
    B: Fn(&[f64], &[f64]) -> Complex,
{
    if !(h > 0.0) || !(grid.half_width > 0.0) || grid.points < 3 {
        return Err(Error::InvalidInput("need h > 0 and a nondegenerate grid".into()));
    }
    let n = phi.n();
    let dim = 2 * n;
    let required = required_points(phi, h, grid.half_width);
    if grid.points < required {
        return Err(Error::UnresolvedOscillation { given: grid.points, required });
    }
    let step = 2.0 * grid.half_width / (grid.points - 1) as f64;
    let axis = |i: usize| -grid.half_width + step * i as f64;
    let total = grid.points.checked_pow(dim as u32).ok_or_else(|| Error::InvalidInput("grid too large".into()))?;
    let mut index = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut acc = Complex::new(0.0, 0.0);
    let mut edge_mass: f64 = 0.0;
    let mut peak: f64 = 0.0;
    for _ in 0..total {
        for (p, &i) in point.iter_mut().zip(&index) {
            *p = axis(i);
        }
        let (x, eta) = point.split_at(n);
        let value = b(x, eta);
        peak = peak.max(value.norm());
        if index.iter().any(|&i| i == 0 || i == grid.points - 1) {
            edge_mass = edge_mass.max(value.norm());
        } else {
            let pairing: f64 = x.iter().zip(eta).map(|(a, c)| a * c).sum();
            acc += value * Complex::from_polar(1.0, (phi.value(x, eta) - pairing) / h);
        }
        for i in index.iter_mut() {
            *i += 1;
            if *i < grid.points {
                break;
            }
            *i = 0;
        }
    }
    if edge_mass > 1e-12 * peak.max(f64::MIN_POSITIVE) {
        return Err(Error::SupportViolation(format!("amplitude reaches the grid boundary (|b| = {edge_mass:e})")));
    }
    Ok(acc * step.powi(dim as i32) / (2.0 * PI * h).powi(n as i32))
}
