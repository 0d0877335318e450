use crate::dynamics::{orbit_maslov, ClosedOrbit};
use crate::spectra::{EnergyWindow, TestFunction};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// `|det(dC^k − I)|` below this counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

/// Contribution of the `k`-th traversal of a closed orbit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GutzwillerTerm {
    pub k: i32,
    /// `T / |det(dC^k − I)|^{1/2}`.
    pub amplitude: f64,
    /// `k S/h + ν_k π/2`.
    pub phase: f64,
    pub maslov: i32,
    /// `(1/2π) e^{i·phase} · amplitude · f̂(−kT) · χ(z)`.
    pub value: Complex,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GutzwillerSum {
    pub value: Complex,
    pub terms: Vec<GutzwillerTerm>,
}

/// Orbit side of the trace formula for `tr f((P − z)/h) χ(P)`, with `z` the
/// orbit energy: the sum over `0 < |k| ≤ N`. The `k = 0` term vanishes
/// because `0 ∉ supp f̂`.
pub fn gutzwiller_sum(orbit: &ClosedOrbit, f: &TestFunction, chi: &EnergyWindow, h: f64, n: i32) -> Result<GutzwillerSum> {
    if !(h > 0.0) || n < 1 {
        return Err(Error::InvalidInput(format!("need h > 0 and N ≥ 1, got h = {h}, N = {n}")));
    }
    if f.support_meets(0.0, 0.0) {
        return Err(Error::SupportViolation("supp f̂ contains 0".into()));
    }
    let dc = orbit.reduced_monodromy();
    let degenerate: Vec<i32> = (-n..=n)
        .filter(|&k| k != 0 && dc.fixed_point_determinant(k).abs() < DEGENERACY_TOL)
        .collect();
    if !degenerate.is_empty() {
        return Err(Error::DegenerateOrbit(degenerate));
    }
    let (t, s) = (orbit.period(), orbit.action());
    let weight = chi.eval(orbit.energy());
    let mut terms = Vec::with_capacity(2 * n as usize);
    for k in (-n..=n).filter(|&k| k != 0) {
        let maslov = match orbit.maslov(k) {
            Some(nu) => nu,
            None => orbit_maslov(orbit, k, &Default::default())?,
        };
        let amplitude = t / dc.fixed_point_determinant(k).abs().sqrt();
        let phase = k as f64 * s / h + maslov as f64 * FRAC_PI_2;
        let value = Complex::from_polar(amplitude * weight / (2.0 * PI), phase) * f.fhat(-(k as f64) * t);
        terms.push(GutzwillerTerm { k, amplitude, phase, maslov, value });
    }
    Ok(GutzwillerSum { value: terms.iter().map(|t| t.value).sum(), terms })
}

/// Multiples `k T` of a target period that fall into `supp f̂`, after
/// checking that no multiple (up to `N`) of the other periods comes within
/// `margin · T` of the support.
pub fn isolate_period(f: &TestFunction, target: f64, others: &[f64], n: i32, margin: f64) -> Result<Vec<i32>> {
    let pad = margin * target;
    let mut collisions: Vec<String> = Vec::new();
    for &other in others {
        for k in (-n..=n).filter(|&k| k != 0) {
            let t = k as f64 * other;
            if f.support_meets(t - pad, t + pad) {
                collisions.push(format!("{k}×{other}"));
            }
        }
    }
    if !collisions.is_empty() {
        return Err(Error::SupportViolation(format!("f̂ overlaps other periods: {}", collisions.join(", "))));
    }
    // f̂ is evaluated at −kT in the trace formula
    let selected: Vec<i32> = (-n..=n).filter(|&k| k != 0 && f.support_meets(-k as f64 * target, -k as f64 * target)).collect();
    if selected.is_empty() {
        return Err(Error::SupportViolation(format!("no multiple of the period {target} lies in supp f̂")));
    }
    Ok(selected)
}
