use crate::linalg::CMat;
use crate::numerics::{bump, bump_derivative, GaussLegendre};
use crate::{Complex, Error, Result};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Periodic grid `x_j = start + j·(end − start)/n`, `j < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1d {
    pub start: f64,
    pub end: f64,
    pub n: usize,
}

impl Grid1d {
    pub fn step(&self) -> f64 {
        (self.end - self.start) / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        self.start + self.step() * j as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Grid with the same extent and enough points for `points_per_wavelength`
    /// samples of `e^{ixξ/h}` at `|ξ| = xi_max`.
    pub fn resolving(start: f64, end: f64, h: f64, xi_max: f64, points_per_wavelength: f64) -> Self {
        let n = required_points(end - start, h, xi_max, points_per_wavelength);
        Self { start, end, n }
    }
}

fn required_points(len: f64, h: f64, xi_max: f64, ppw: f64) -> usize {
    let n = (ppw * xi_max * len / (2.0 * PI * h)).ceil() as usize;
    (n.max(8) + 1) & !1
}

/// Real symbol `a(x, ξ)` with the edge `xi_max` of its relevant momentum
/// range and optionally a bounded `x`-support.
#[derive(Clone)]
pub struct Symbol {
    f: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    xi_max: f64,
    x_support: Option<(f64, f64)>,
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Symbol").field("xi_max", &self.xi_max).field("x_support", &self.x_support).finish()
    }
}

impl Symbol {
    pub fn new(xi_max: f64, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), xi_max, x_support: None }
    }

    /// Declares that `a(x, ·) = 0` for `x ∉ [lo, hi]`.
    pub fn with_x_support(mut self, lo: f64, hi: f64) -> Self {
        self.x_support = Some((lo, hi));
        self
    }

    pub fn eval(&self, x: f64, xi: f64) -> f64 {
        (self.f)(x, xi)
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    fn vanishes_at(&self, x: f64) -> bool {
        matches!(self.x_support, Some((lo, hi)) if x < lo || x > hi)
    }
}

/// Orientation-preserving diffeomorphism of the line with its derivative.
#[derive(Clone)]
pub struct Diffeo1d {
    map: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Diffeo1d {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Diffeo1d")
    }
}

impl Diffeo1d {
    pub fn new(map: impl Fn(f64) -> f64 + Send + Sync + 'static, derivative: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { map: Arc::new(map), derivative: Arc::new(derivative) }
    }

    pub fn identity() -> Self {
        Self::new(|x| x, |_| 1.0)
    }

    /// `x ↦ scale·x + shift`.
    pub fn affine(scale: f64, shift: f64) -> Self {
        Self::new(move |x| scale * x + shift, move |_| scale)
    }

    /// `x ↦ x + eps·bump((x − centre)/width)`, the identity outside a compact set.
    pub fn bump_shift(eps: f64, centre: f64, width: f64) -> Self {
        Self::new(
            move |x| x + eps * bump((x - centre) / width),
            move |x| 1.0 + eps * bump_derivative((x - centre) / width) / width,
        )
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.map)(x)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        (self.derivative)(x)
    }
}

/// Resolution settings shared by the Weyl routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylOptions {
    /// Minimal grid points per wavelength of `e^{ixξ/h}` at the symbol's `ξ` edge.
    pub points_per_wavelength: f64,
    /// Continuum kernels are evaluated for `|x − y| ≤ kernel_width · h` and
    /// set to zero beyond.
    pub kernel_width: f64,
    /// Gauss–Legendre nodes per half oscillation of the `ξ` integrand.
    pub xi_nodes: usize,
    /// Lower bound on the number of `ξ` panels, so that the symbol itself is
    /// resolved when the phase barely oscillates.
    pub xi_panels: usize,
}

impl Default for WeylOptions {
    fn default() -> Self {
        Self { points_per_wavelength: 8.0, kernel_width: 20.0, xi_nodes: 16, xi_panels: 16 }
    }
}

fn check_resolution(grid: &Grid1d, h: f64, xi_max: f64, ppw: f64) -> Result<()> {
    if !(h > 0.0) || grid.n < 2 || !(grid.end > grid.start) {
        return Err(Error::InvalidInput("Weyl quantization needs h > 0 and a nondegenerate grid".into()));
    }
    let required = required_points(grid.end - grid.start, h, xi_max, ppw);
    if grid.n < required {
        return Err(Error::GridTooCoarse { given: grid.n, required });
    }
    Ok(())
}

/// Matrix of `Op_h^w(a)` acting on grid values: entries
/// `(1/n) Σ_m a((x_j + x_k)/2, ξ_m) e^{2πi(j−k)m/n}` over the dual grid
/// `ξ_m = 2πh m / L`, `|m| ≤ n/2` (trapezoid weights at the ends).
pub fn weyl_quantize(a: &Symbol, h: f64, grid: &Grid1d, opts: &WeylOptions) -> Result<CMat> {
    check_resolution(grid, h, a.xi_max, opts.points_per_wavelength)?;
    let n = grid.n;
    let len = grid.end - grid.start;
    let half = (n / 2) as i64;
    let modes: Vec<(i64, f64)> = (-half..=half)
        .map(|m| (m, if n % 2 == 0 && m.abs() == half { 0.5 } else { 1.0 }))
        .collect();
    let twiddle: Vec<Complex> = (0..n).map(|r| Complex::from_polar(1.0, 2.0 * PI * r as f64 / n as f64)).collect();
    let mut out = CMat::zeros(n, n);
    let mut column = alloc::vec![0.0; modes.len()];
    for s in 0..(2 * n - 1) {
        let mid = grid.start + 0.5 * grid.step() * s as f64;
        if a.vanishes_at(mid) {
            continue;
        }
        for (c, &(m, w)) in column.iter_mut().zip(&modes) {
            *c = w * a.eval(mid, 2.0 * PI * h * m as f64 / len);
        }
        let j_lo = s.saturating_sub(n - 1);
        let j_hi = s.min(n - 1);
        for j in j_lo..=j_hi {
            let k = s - j;
            let d = j as i64 - k as i64;
            let mut acc = Complex::new(0.0, 0.0);
            for (c, &(m, _)) in column.iter().zip(&modes) {
                acc += twiddle[(d * m).rem_euclid(n as i64) as usize] * *c;
            }
            out[(j, k)] = acc / n as f64;
        }
    }
    Ok(out)
}

/// Continuum Weyl kernel `(1/2πh) ∫ a((x+y)/2, ξ) e^{i(x−y)ξ/h} dξ` over
/// `|ξ| ≤ xi_max`.
fn continuum_kernel(a: &dyn Fn(f64, f64) -> f64, xi_max: f64, x: f64, y: f64, h: f64, rule: &GaussLegendre, min_panels: usize) -> Complex {
    let mid = 0.5 * (x + y);
    let d = x - y;
    let panels = min_panels.max(1 + (d.abs() * xi_max / (PI * h)).ceil() as usize);
    let (nodes, weights) = rule.composite(-xi_max, xi_max, panels);
    let mut acc = Complex::new(0.0, 0.0);
    for (&xi, &w) in nodes.iter().zip(&weights) {
        acc += Complex::from_polar(w * a(mid, xi), d * xi / h);
    }
    acc / (2.0 * PI * h)
}

/// `‖U Op(a) U⁻¹ − Op(a ∘ K)‖₂` on the grid, where `(Uu)(x) = u(κ(x)) κ'(x)^{1/2}`
/// is the half-density pull-back and `K(x, ξ) = (κ(x), ξ/κ'(x))` its
/// canonical lift. Both operators are built from continuum kernels sampled
/// on the grid, so the value measures the symbol-level defect, `O(h²)` for
/// nonlinear `κ` and zero up to quadrature error for affine `κ`.
pub fn weyl_invariance_residual(a: &Symbol, kappa: &Diffeo1d, h: f64, grid: &Grid1d, opts: &WeylOptions) -> Result<f64> {
    let xs = grid.points();
    let mut max_slope: f64 = 0.0;
    for x in xs.iter().flat_map(|&x| [x, x + 0.5 * grid.step()]) {
        let d = kappa.derivative(x);
        if !(d > 0.0) {
            return Err(Error::InvalidDiffeomorphism { at: x, derivative: d });
        }
        max_slope = max_slope.max(d);
    }
    let pulled_xi = a.xi_max * max_slope;
    check_resolution(grid, h, a.xi_max.max(pulled_xi), opts.points_per_wavelength)?;
    let rule = GaussLegendre::new(opts.xi_nodes.max(2));
    let n = grid.n;
    let width = opts.kernel_width * h;
    let kx: Vec<f64> = xs.iter().map(|&x| kappa.eval(x)).collect();
    let dk: Vec<f64> = xs.iter().map(|&x| kappa.derivative(x).sqrt()).collect();
    let sym = |x: f64, xi: f64| a.eval(x, xi);
    let kappa_b = kappa.clone();
    let a_b = a.clone();
    let pulled = move |x: f64, xi: f64| {
        let d = kappa_b.derivative(x);
        a_b.eval(kappa_b.eval(x), xi / d)
    };
    let mut r = CMat::zeros(n, n);
    let dx = grid.step();
    for j in 0..n {
        for k in 0..=j {
            let mut v = Complex::new(0.0, 0.0);
            if (kx[j] - kx[k]).abs() <= width && !a.vanishes_at(0.5 * (kx[j] + kx[k])) {
                v += continuum_kernel(&sym, a.xi_max, kx[j], kx[k], h, &rule, opts.xi_panels) * (dk[j] * dk[k]);
            }
            let mid = 0.5 * (xs[j] + xs[k]);
            if (xs[j] - xs[k]).abs() <= width && !a.vanishes_at(kappa.eval(mid)) {
                v -= continuum_kernel(&pulled, pulled_xi, xs[j], xs[k], h, &rule, opts.xi_panels);
            }
            r[(j, k)] = v * dx;
            r[(k, j)] = v.conj() * dx;
        }
    }
    let eigs = r.symmetric_eigenvalues();
    Ok(eigs.iter().fold(0.0f64, |m, e| m.max(e.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_symbol_gives_identity() {
        let grid = Grid1d { start: -2.0, end: 2.0, n: 64 };
        let a = Symbol::new(1.0, |_, _| 1.0);
        let m = weyl_quantize(&a, 0.1, &grid, &WeylOptions::default()).unwrap();
        let eye = CMat::identity(64, 64);
        assert!(crate::linalg::max_abs_c(&(m - eye)) < 1e-13);
    }

    #[test]
    fn coarse_grid_is_refused() {
        let grid = Grid1d { start: -1.0, end: 1.0, n: 16 };
        let a = Symbol::new(5.0, |_, xi| xi);
        assert!(matches!(weyl_quantize(&a, 0.05, &grid, &WeylOptions::default()), Err(Error::GridTooCoarse { .. })));
    }
}
