use super::test_function::TestFunction;
use super::window::EnergyWindow;
use crate::linalg::{symmetry_residual, RMat};
use crate::numerics::{find_root, Polynomial};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Spatial domain for the one-dimensional Schrödinger operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Periodic interval `[start, end)`; the potential should be periodic.
    Periodic { start: f64, end: f64 },
    /// Confining well: the periodic box is sized to 1.5 times the classical
    /// region at the top of the reliable range.
    Confining,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `P = (h/i) d/dx` on `ℝ/2πℤ`; `truncation` bounds `|n|`.
    Circle,
    /// `P = −h² d²/dx² + V`; `truncation` is the number of grid points.
    Schrodinger1d { potential: Polynomial, domain: Domain },
    /// `P = Σ (−h²∂ᵢ² + ωᵢ² xᵢ²)/2`; `truncation` bounds each quantum number.
    Oscillator2d { omega: [f64; 2] },
}

/// A quantum model together with its semiclassical parameter, truncation and
/// the top `energy_max` of the energy range it has to resolve.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    pub kind: ModelKind,
    pub h: f64,
    pub truncation: usize,
    pub energy_max: f64,
}

/// Sorted eigenvalues together with the range on which the list is complete
/// and accurate.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
    reliable: (f64, f64),
}

impl Spectrum {
    /// Sorts `values`; `reliable` is the interval on which they are complete.
    pub fn new(mut values: Vec<f64>, reliable: (f64, f64)) -> Self {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
        Self { values, reliable }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn reliable(&self) -> (f64, f64) {
        self.reliable
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Eigenvalues inside `[lo, hi]`.
    pub fn within(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.values.iter().copied().filter(|&e| e >= lo && e <= hi).collect()
    }
}

/// Fraction of the reliable range kept free above the requested energies.
const RELIABILITY_MARGIN: f64 = 0.1;

pub fn model_spectrum(model: &SpectralModel) -> Result<Spectrum> {
    if !(model.h > 0.0) {
        return Err(Error::InvalidInput(format!("h must be positive, got {}", model.h)));
    }
    match &model.kind {
        ModelKind::Circle => circle_spectrum(model),
        ModelKind::Oscillator2d { omega } => oscillator_spectrum(model, *omega),
        ModelKind::Schrodinger1d { potential, domain } => schrodinger_spectrum(model, potential, *domain),
    }
}

fn circle_spectrum(model: &SpectralModel) -> Result<Spectrum> {
    let required = (model.energy_max.abs() * (1.0 + RELIABILITY_MARGIN) / model.h).ceil() as usize;
    if model.truncation < required {
        return Err(Error::WindowNotResolved { given: model.truncation, required });
    }
    let n = model.truncation as i64;
    let values = (-n..=n).map(|k| model.h * k as f64).collect();
    let top = model.h * n as f64;
    Ok(Spectrum::new(values, (-top, top)))
}

fn oscillator_spectrum(model: &SpectralModel, omega: [f64; 2]) -> Result<Spectrum> {
    if !(omega[0] > 0.0 && omega[1] > 0.0) {
        return Err(Error::InvalidInput("oscillator frequencies must be positive".into()));
    }
    let h = model.h;
    // lowest level that a cap of t quanta per mode leaves out
    let missing = |t: usize| {
        let t = t as f64;
        h * (omega[0] * (t + 1.5) + 0.5 * omega[1]).min(omega[1] * (t + 1.5) + 0.5 * omega[0])
    };
    let target = model.energy_max * (1.0 + RELIABILITY_MARGIN);
    let mut required = 0;
    while missing(required) < target {
        required += 1;
    }
    if model.truncation < required {
        return Err(Error::WindowNotResolved { given: model.truncation, required });
    }
    let cap = missing(model.truncation);
    let mut values = Vec::new();
    for n in 0..=model.truncation {
        for m in 0..=model.truncation {
            let e = h * (omega[0] * (n as f64 + 0.5) + omega[1] * (m as f64 + 0.5));
            if e < cap {
                values.push(e);
            }
        }
    }
    Ok(Spectrum::new(values, (f64::NEG_INFINITY, cap)))
}

/// Minimum of a polynomial well, located by scanning and golden-section
/// refinement on `[−span, span]`.
pub(crate) fn well_minimum(v: &Polynomial, span: f64) -> (f64, f64) {
    let samples = 4001;
    let mut best = (0.0, v.eval(0.0));
    for i in 0..samples {
        let x = -span + 2.0 * span * i as f64 / (samples - 1) as f64;
        let y = v.eval(x);
        if y < best.1 {
            best = (x, y);
        }
    }
    let step = 2.0 * span / (samples - 1) as f64;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if v.eval(c) < v.eval(d) {
            b = d;
        } else {
            a = c;
        }
    }
    let x = 0.5 * (a + b);
    (x, v.eval(x))
}

/// Turning points `x₋ < x_min < x₊` with `V(x±) = e`.
pub(crate) fn turning_points(v: &Polynomial, x_min: f64, e: f64) -> Result<(f64, f64)> {
    let outward = |dir: f64| -> Result<f64> {
        let mut step = 1e-3;
        let mut inner = x_min;
        for _ in 0..200 {
            let x = x_min + dir * step;
            if v.eval(x) >= e {
                let r = find_root(|s| v.eval(s) - e, inner.min(x), inner.max(x), 1e-15);
                return r.ok_or_else(|| Error::InvalidInput("turning point not bracketed".into()));
            }
            inner = x;
            step *= 1.5;
        }
        Err(Error::InvalidInput(format!("potential does not confine at energy {e}")))
    };
    Ok((outward(-1.0)?, outward(1.0)?))
}

/// Second-derivative matrix of trigonometric interpolation on `n` (even)
/// equispaced points of a period of length `len`.
fn periodic_second_derivative(n: usize, len: f64) -> RMat {
    let mut d2 = RMat::zeros(n, n);
    let step = 2.0 * PI / n as f64;
    let scale = (2.0 * PI / len).powi(2);
    for j in 0..n {
        for k in 0..n {
            d2[(j, k)] = scale
                * if j == k {
                    -PI * PI / (3.0 * step * step) - 1.0 / 6.0
                } else {
                    let d = j as f64 - k as f64;
                    let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
                    -sign / (2.0 * (0.5 * d * step).sin().powi(2))
                };
        }
    }
    d2
}

fn schrodinger_spectrum(model: &SpectralModel, v: &Polynomial, domain: Domain) -> Result<Spectrum> {
    let h = model.h;
    let (start, len, v_min) = match domain {
        Domain::Periodic { start, end } => {
            if !(end > start) {
                return Err(Error::InvalidInput("periodic domain needs end > start".into()));
            }
            let v_min = (0..=1000).map(|i| v.eval(start + (end - start) * i as f64 / 1000.0)).fold(f64::INFINITY, f64::min);
            (start, end - start, v_min)
        }
        Domain::Confining => {
            let (x0, v_min) = well_minimum(v, 10.0);
            let top = v_min + (model.energy_max - v_min) / (1.0 - RELIABILITY_MARGIN);
            let (a, b) = turning_points(v, x0, top)?;
            let centre = 0.5 * (a + b);
            let half = 0.75 * (b - a);
            (centre - half, 2.0 * half, v_min)
        }
    };
    let top = v_min + (model.energy_max - v_min).max(0.0) / (1.0 - RELIABILITY_MARGIN);
    // Nyquist momentum h·πN/L at least twice the largest classical momentum
    let required = (2.0 * len * (top - v_min).max(0.0).sqrt() / (PI * h)).ceil() as usize;
    let required = (required.max(8) + 1) & !1;
    if model.truncation < required {
        return Err(Error::WindowNotResolved { given: model.truncation, required });
    }
    let n = model.truncation & !1;
    let mut hmat = periodic_second_derivative(n, len) * (-h * h);
    for j in 0..n {
        hmat[(j, j)] += v.eval(start + len * j as f64 / n as f64);
    }
    let scale = hmat.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let residual = symmetry_residual(&hmat);
    if residual > 1e-12 * scale {
        return Err(Error::NotSymmetric { residual });
    }
    let values: Vec<f64> = hmat.symmetric_eigenvalues().iter().copied().filter(|&e| e <= top).collect();
    Ok(Spectrum::new(values, (v_min, top)))
}

/// Value of `Σⱼ f((Eⱼ − z₀)/h) χ(Eⱼ)` with a diagnostic for its sensitivity
/// to the rolloff of `χ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralTrace {
    pub value: Complex,
    /// `Σ |f((E − z₀)/h)|` over eigenvalues where `0 < χ < 1`.
    pub rolloff_mass: f64,
    /// Number of eigenvalues in the support of `χ`.
    pub terms: usize,
}

/// `Σⱼ f((Eⱼ − z₀)/h) χ(Eⱼ)`, i.e. `tr f((P − z₀)/h) χ(P)`; refuses when the
/// spectrum is not known to be complete on the support of `χ`.
pub fn spectral_trace(spectrum: &Spectrum, f: &TestFunction, chi: &EnergyWindow, h: f64, z0: f64) -> Result<SpectralTrace> {
    let (lo, hi) = chi.support();
    let (rlo, rhi) = spectrum.reliable();
    if lo < rlo || hi > rhi {
        return Err(Error::IncompleteSpectrum { needed_lo: lo, needed_hi: hi, covered_lo: rlo, covered_hi: rhi });
    }
    let (plo, phi) = chi.plateau();
    let mut value = Complex::new(0.0, 0.0);
    let mut rolloff_mass = 0.0;
    let mut terms = 0;
    for &e in spectrum.values() {
        if e <= lo || e >= hi {
            continue;
        }
        let c = chi.eval(e);
        let fe = f.eval((e - z0) / h);
        value += fe * c;
        if e < plo || e > phi {
            rolloff_mass += fe.norm();
        }
        terms += 1;
    }
    Ok(SpectralTrace { value, rolloff_mass, terms })
}
