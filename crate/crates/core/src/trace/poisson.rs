use super::scalar::{monodromy_with_derivative, ScalarMonodromy};
use crate::numerics::GaussLegendre;
use crate::spectra::{model_spectrum, spectral_trace, EnergyWindow, ModelKind, SpectralModel, TestFunction};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Relative size of `f` below which its tails are dropped.
const TAIL_TOL: f64 = 1e-11;

/// Spectral and monodromy sides of the circle trace identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonSides {
    pub lhs: Complex,
    pub rhs: Complex,
    /// `(k, (1/2πi) ∫ f(z/h) M^k M′ dz)` for `|k| ≤ N`.
    pub terms: Vec<(i32, Complex)>,
}

/// `Σₙ f(n)` over the circle spectrum `hℤ` against
/// `Σ_{|k|≤N} (1/2πi) ∫ f(z/h) M(z)^k M′(z) dz` with `M = e^{2πiz/h}`.
pub fn poisson_both_sides(f: &TestFunction, h: f64, n: i32) -> Result<PoissonSides> {
    if n < 1 {
        return Err(Error::InvalidInput(format!("N must be at least 1, got {n}")));
    }
    let bound = 2.0 * PI * n as f64;
    let (lo, hi) = f.support_hull();
    if lo <= -bound || hi >= bound {
        return Err(Error::SupportViolation(format!("supp f̂ = [{lo}, {hi}] not inside (−{bound}, {bound})")));
    }
    let mono = ScalarMonodromy::circle(h)?;
    let radius = f.decay_radius(TAIL_TOL).ceil() + 1.0;

    // χ ≡ 1 on every eigenvalue where f is not negligible
    let plateau = h * radius;
    let chi = EnergyWindow::new(-plateau, plateau, h)?;
    let energy_max = plateau + h;
    let truncation = (1.2 * energy_max / h).ceil() as usize;
    let spectrum = model_spectrum(&SpectralModel { kind: ModelKind::Circle, h, truncation, energy_max })?;
    let lhs = spectral_trace(&spectrum, f, &chi, h, 0.0)?.value;

    let band = f.pieces().iter().map(|p| p.center.abs() + p.half_width).fold(0.0, f64::max);
    // 24-node panels spanning four half-waves of the fastest integrand
    let half_waves = 2.0 * radius * (band + 2.0 * PI * (n as f64 + 1.0)) / PI;
    let (nodes, weights) = GaussLegendre::new(24).composite(-plateau, plateau, 8 + (half_waves / 4.0).ceil() as usize);
    let samples: Vec<(Complex, Complex, Complex)> = nodes
        .iter()
        .zip(&weights)
        .map(|(&z, &w)| {
            let (m, dm) = monodromy_with_derivative(&mono, Complex::new(z, 0.0))?;
            Ok((f.eval(z / h) * w, m, dm))
        })
        .collect::<Result<_>>()?;
    let mut terms = Vec::with_capacity(2 * n as usize + 1);
    for k in -n..=n {
        let integral: Complex = samples.iter().map(|&(fw, m, dm)| fw * m.powi(k) * dm).sum();
        terms.push((k, integral / Complex::new(0.0, 2.0 * PI)));
    }
    let rhs = terms.iter().map(|t| t.1).sum();
    Ok(PoissonSides { lhs, rhs, terms })
}
