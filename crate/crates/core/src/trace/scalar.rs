use crate::numerics::{find_root, GaussLegendre, Polynomial};
use crate::spectra::{turning_points, well_minimum, EnergyWindow, TestFunction};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Half-width of the interval scanned for the bottom of a well.
const WELL_SPAN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarModel {
    /// `p = ξ` on the circle, `I(z) = 2πz`.
    Circle,
    /// `p = ξ² + V(x)` with a single confining well.
    Well { potential: Polynomial },
}

/// Scalar quantum monodromy `M(z, h) = exp(i I(z)/h + i θ)` of a one-orbit
/// model, with action `I` and Maslov phase `θ` per return.
#[derive(Debug, Clone)]
pub struct ScalarMonodromy {
    model: ScalarModel,
    h: f64,
    strip: f64,
    bottom: (f64, f64),
    rule: GaussLegendre,
}

impl ScalarMonodromy {
    pub fn circle(h: f64) -> Result<Self> {
        Self::build(ScalarModel::Circle, h, (0.0, f64::NEG_INFINITY))
    }

    pub fn well(potential: Polynomial, h: f64) -> Result<Self> {
        if potential.degree() < 2 || potential.degree() % 2 != 0 || potential.coeffs()[potential.degree()] <= 0.0 {
            return Err(Error::InvalidInput("well potential must have even degree and positive leading coefficient".into()));
        }
        let bottom = well_minimum(&potential, WELL_SPAN);
        Self::build(ScalarModel::Well { potential }, h, bottom)
    }

    fn build(model: ScalarModel, h: f64, bottom: (f64, f64)) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidInput(format!("h must be positive, got {h}")));
        }
        Ok(Self { model, h, strip: 1.0, bottom, rule: GaussLegendre::new(24) })
    }

    /// Sets `L` in the admissible strip `|Im z| ≤ L h log(1/h)`.
    pub fn with_strip_constant(mut self, l: f64) -> Self {
        self.strip = l;
        self
    }

    pub fn model(&self) -> &ScalarModel {
        &self.model
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::build(self.model.clone(), h, self.bottom).map(|m| m.with_strip_constant(self.strip))
    }

    /// Maslov phase `θ` gained per return: `−π/2` per turning point, so
    /// `−π` in a well and `0` on the circle.
    pub fn maslov_phase(&self) -> f64 {
        match self.model {
            ScalarModel::Circle => 0.0,
            ScalarModel::Well { .. } => -PI,
        }
    }

    /// `θ` in quarter turns, the `ν` of one return.
    pub fn maslov_index(&self) -> i32 {
        (self.maslov_phase() / FRAC_PI_2).round() as i32
    }

    /// Energies with a classical orbit: `(V_min, ∞)` for a well.
    pub fn allowed_window(&self) -> (f64, f64) {
        (self.bottom.1, f64::INFINITY)
    }

    /// Largest admissible `|Im z|`.
    pub fn strip_limit(&self) -> f64 {
        self.strip * self.h * (1.0 / self.h).ln().max(0.0)
    }

    /// `I(z) = ∮ ξ dx` at real energy `z`.
    pub fn action(&self, z: f64) -> Result<f64> {
        match &self.model {
            ScalarModel::Circle => Ok(2.0 * PI * z),
            ScalarModel::Well { potential } => Ok(self.well_integrals(potential, z)?.0),
        }
    }

    /// `T(z) = I′(z)`.
    pub fn period(&self, z: f64) -> Result<f64> {
        match &self.model {
            ScalarModel::Circle => Ok(2.0 * PI),
            ScalarModel::Well { potential } => Ok(self.well_integrals(potential, z)?.1),
        }
    }

    /// `I = 2∫√(z − V) dx` and `T = ∫dx/√(z − V)` between the turning points.
    /// With `z − V = (x − a)(b − x) Q(x)` and `x = m + r sin φ` both
    /// integrands are smooth: `2r² cos²φ √Q` and `1/√Q`.
    fn well_integrals(&self, v: &Polynomial, z: f64) -> Result<(f64, f64)> {
        if !(z > self.bottom.1) {
            return Err(Error::InvalidInput(format!("energy {z} is at or below the well bottom {}", self.bottom.1)));
        }
        let (a, b) = turning_points(v, self.bottom.0, z)?;
        let (m, r) = (0.5 * (a + b), 0.5 * (b - a));
        let mut gap: Vec<f64> = v.coeffs().iter().map(|c| -c).collect();
        gap[0] += z;
        let q = Polynomial::new(deflate(&deflate(&gap, a), b).iter().map(|c| -c).collect());
        let (nodes, weights) = self.rule.composite(-FRAC_PI_2, FRAC_PI_2, 8);
        let (mut action, mut period) = (0.0, 0.0);
        for (&phi, &w) in nodes.iter().zip(&weights) {
            let (s, c) = phi.sin_cos();
            let qx = q.eval(m + r * s);
            if !(qx > 0.0) {
                return Err(Error::InvalidInput(format!("energy {z} does not bound a single well")));
            }
            action += w * 2.0 * r * r * c * c * qx.sqrt();
            period += w / qx.sqrt();
        }
        Ok((action, period))
    }

    /// `(I′′, I′′′)` from central differences of `T`.
    fn higher_derivatives(&self, x: f64) -> Result<(f64, f64)> {
        match &self.model {
            ScalarModel::Circle => Ok((0.0, 0.0)),
            ScalarModel::Well { .. } => {
                let d = (1e-3 * (1.0 + x.abs())).min(0.25 * (x - self.bottom.1));
                let (tm, t0, tp) = (self.period(x - d)?, self.period(x)?, self.period(x + d)?);
                Ok(((tp - tm) / (2.0 * d), (tp - 2.0 * t0 + tm) / (d * d)))
            }
        }
    }

    /// Order-3 almost-analytic extension of `I` and its `z`-derivative.
    pub fn action_extended(&self, z: Complex) -> Result<(Complex, Complex)> {
        let i0 = self.action(z.re)?;
        if z.im == 0.0 {
            return Ok((Complex::new(i0, 0.0), Complex::new(self.period(z.re)?, 0.0)));
        }
        let i1 = self.period(z.re)?;
        let (i2, i3) = self.higher_derivatives(z.re)?;
        let iy = Complex::new(0.0, z.im);
        let value = i0 + iy * i1 + iy * iy * (i2 / 2.0) + iy * iy * iy * (i3 / 6.0);
        let slope = i1 + iy * i2 + iy * iy * (i3 / 2.0);
        Ok((value, slope))
    }
}

/// `M(z, h) = exp(i I(z)/h + i θ)` inside the strip `|Im z| ≤ L h log(1/h)`.
pub fn scalar_monodromy(mono: &ScalarMonodromy, z: Complex) -> Result<Complex> {
    Ok(monodromy_with_derivative(mono, z)?.0)
}

/// `(M, dM/dz)` with `dM/dz = (i/h) I′(z) M`.
pub fn monodromy_with_derivative(mono: &ScalarMonodromy, z: Complex) -> Result<(Complex, Complex)> {
    let limit = mono.strip_limit();
    if z.im.abs() > limit {
        return Err(Error::OutsideStrip { im: z.im.abs(), limit });
    }
    let (action, slope) = mono.action_extended(z)?;
    let i = Complex::new(0.0, 1.0);
    let m = (i * (action / mono.h + mono.maslov_phase())).exp();
    Ok((m, i * slope / mono.h * m))
}

/// Real roots of `1 − M(z, h)` in `[lo, hi]`: `I(z) = h(2πn − θ)`.
pub fn bohr_sommerfeld_eigenvalues(mono: &ScalarMonodromy, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo <= hi) {
        return Err(Error::InvalidInput(format!("empty window [{lo}, {hi}]")));
    }
    let floor = mono.allowed_window().0;
    let lo = if lo > floor { lo } else { floor };
    if hi <= lo {
        return Ok(Vec::new());
    }
    // the action vanishes at the bottom of a well
    let action = |z: f64| if z <= floor { Ok(0.0) } else { mono.action(z) };
    let probes = 32;
    let mut previous = action(lo)?;
    for j in 1..=probes {
        let z = lo + (hi - lo) * j as f64 / probes as f64;
        let (now, t) = (action(z)?, mono.period(z)?);
        if !(t > 0.0) || now < previous {
            return Err(Error::NonMonotoneAction { at: z });
        }
        previous = now;
    }
    let theta = mono.maslov_phase();
    let phase = |z: f64| action(z).map(|a| a / mono.h + theta);
    let (first, last) = (phase(lo)?, phase(hi)?);
    let n_lo = (first / (2.0 * PI)).ceil() as i64;
    let n_hi = (last / (2.0 * PI)).floor() as i64;
    let mut roots = Vec::new();
    for n in n_lo..=n_hi {
        let target = 2.0 * PI * n as f64;
        let root = find_root(|z| phase(z).unwrap_or(f64::NAN) - target, lo, hi, 1e-15)
            .ok_or(Error::NonMonotoneAction { at: lo })?;
        roots.push(root);
    }
    Ok(roots)
}

/// Both sides of the scalar monodromy-trace identity for repetition `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonodromyIntegral {
    /// `(1/2πi) ∫ f((z − z₀)/h) M^{k−1} M′ χ dz` by quadrature.
    pub lhs: Complex,
    /// `(1/2π) e^{ikI(z₀)/h + iν_k π/2} T(z₀) χ(z₀) f̂(−kT(z₀))`, `ν_k = kθ/(π/2)`.
    pub rhs: Complex,
}

/// The contour is the real axis over the support of `χ`, which must lie
/// in the allowed energy window.
pub fn monodromy_trace_integral(
    mono: &ScalarMonodromy,
    f: &TestFunction,
    chi: &EnergyWindow,
    k: i32,
    z0: f64,
) -> Result<MonodromyIntegral> {
    if k < 1 {
        return Err(Error::InvalidInput(format!("repetition must be positive, got {k}")));
    }
    let (lo, hi) = chi.support();
    if lo <= mono.allowed_window().0 {
        return Err(Error::SupportViolation(format!("χ reaches below the classical window at {lo}")));
    }
    let h = mono.h;
    let t_max = (0..=16).map(|j| mono.period(lo + (hi - lo) * j as f64 / 16.0)).collect::<Result<Vec<_>>>()?;
    let t_max = t_max.iter().fold(0.0f64, |a, &b| a.max(b));
    let band = f.pieces().iter().map(|p| p.center.abs() + p.half_width).fold(0.0, f64::max);
    // oscillation of f((z − z₀)/h) M^k, plus a floor resolving χ
    let half_waves = (hi - lo) * (k as f64 * t_max + band) / (PI * h);
    let panels = 16 + half_waves.ceil() as usize;
    let (nodes, weights) = GaussLegendre::new(24).composite(lo, hi, panels);
    let mut lhs = Complex::new(0.0, 0.0);
    for (&z, &w) in nodes.iter().zip(&weights) {
        let c = chi.eval(z);
        if c == 0.0 {
            continue;
        }
        let (m, dm) = monodromy_with_derivative(mono, Complex::new(z, 0.0))?;
        lhs += f.eval((z - z0) / h) * m.powi(k - 1) * dm * (w * c);
    }
    lhs /= Complex::new(0.0, 2.0 * PI);
    let t0 = mono.period(z0)?;
    let nu = k * mono.maslov_index();
    let phase = k as f64 * mono.action(z0)? / h + nu as f64 * FRAC_PI_2;
    let rhs = Complex::from_polar(t0 * chi.eval(z0) / (2.0 * PI), phase) * f.fhat(-(k as f64) * t0);
    Ok(MonodromyIntegral { lhs, rhs })
}

/// Quotient of an ascending coefficient list by `x − root`.
fn deflate(coeffs: &[f64], root: f64) -> Vec<f64> {
    let mut quotient = vec![0.0; coeffs.len() - 1];
    let mut acc = 0.0;
    for i in (1..coeffs.len()).rev() {
        acc = coeffs[i] + acc * root;
        quotient[i - 1] = acc;
    }
    quotient
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_well_action_is_linear() {
        let m = ScalarMonodromy::well(Polynomial::new(alloc::vec![0.0, 0.0, 1.0]), 0.1).unwrap();
        for &e in &[0.01, 0.7, 3.0] {
            assert!((m.action(e).unwrap() - PI * e).abs() < 1e-13);
            assert!((m.period(e).unwrap() - PI).abs() < 1e-12);
        }
        assert_eq!(m.maslov_index(), -2);
    }

    #[test]
    fn strip_is_enforced() {
        let m = ScalarMonodromy::circle(0.1).unwrap();
        let limit = m.strip_limit();
        assert!(scalar_monodromy(&m, Complex::new(0.3, 0.9 * limit)).is_ok());
        assert!(matches!(scalar_monodromy(&m, Complex::new(0.3, 1.1 * limit)), Err(Error::OutsideStrip { .. })));
    }
}
