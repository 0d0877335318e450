use crate::linalg::{hermitian_residual, max_abs_c, CMat};
use crate::numerics::{smooth_step, smooth_step_derivative, GaussLegendre};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Samples of a real function on the uniform grid `start + j·step`; the
/// function is taken to vanish outside the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    start: f64,
    step: f64,
    values: Vec<f64>,
}

impl SampledFunction {
    pub fn new(start: f64, step: f64, values: Vec<f64>) -> Result<Self> {
        if !(step > 0.0) || values.len() < 2 {
            return Err(Error::InvalidInput("sampled function needs step > 0 and two samples".into()));
        }
        Ok(Self { start, step, values })
    }

    /// Samples `g` at `n` points spanning `[a, b]`.
    pub fn from_fn(a: f64, b: f64, n: usize, g: impl Fn(f64) -> f64) -> Result<Self> {
        if n < 2 || !(b > a) {
            return Err(Error::InvalidInput("grid needs b > a and n ≥ 2".into()));
        }
        let step = (b - a) / (n - 1) as f64;
        Self::new(a, step, (0..n).map(|j| g(a + step * j as f64)).collect())
    }

    pub fn range(&self) -> (f64, f64) {
        (self.start, self.start + self.step * (self.values.len() - 1) as f64)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn node(&self, j: usize) -> f64 {
        self.start + self.step * j as f64
    }
}

/// Finite-difference weights for derivatives `0..=m` at `x0` (Fornberg).
fn fornberg(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = alloc::vec![alloc::vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Taylor-type almost-analytic extension
/// `g̃(x + iy) = Σ_{j≤N} g^{(j)}(x) (iy)^j / j!`, for which
/// `∂̄g̃ = ½ g^{(N+1)}(x) (iy)^N / N!` exactly.
#[derive(Debug, Clone)]
pub struct AlmostAnalytic {
    samples: SampledFunction,
    order: usize,
    width: usize,
}

/// Extra stencil points beyond the highest derivative taken.
const STENCIL_SURPLUS: usize = 8;
/// Relative disagreement between two stencil widths that flags an
/// under-resolved top derivative.
const RESOLUTION_TOL: f64 = 5e-2;

pub fn almost_analytic_extension(g: &SampledFunction, order: usize) -> Result<AlmostAnalytic> {
    if order < 1 {
        return Err(Error::InvalidInput("extension order must be at least 1".into()));
    }
    let width = order + 2 + STENCIL_SURPLUS;
    if g.values.len() < width + 2 {
        return Err(Error::InsufficientResolution(format!("{} samples, need at least {}", g.values.len(), width + 2)));
    }
    let ext = AlmostAnalytic { samples: g.clone(), order, width };
    let wider = AlmostAnalytic { width: width + 2, ..ext.clone() };
    let mut scale = 0.0f64;
    let mut diff = 0.0f64;
    let mut roundoff = 0.0f64;
    let peak = g.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let stride = (g.values.len() / 200).max(1);
    for j in (0..g.values.len()).step_by(stride) {
        let x = g.node(j) + 0.37 * g.step;
        let (a, wa) = ext.top_derivative(x);
        let (b, wb) = wider.top_derivative(x);
        scale = scale.max(a.abs());
        diff = diff.max((a - b).abs());
        roundoff = roundoff.max(1e2 * f64::EPSILON * peak * (wa + wb));
    }
    if diff > RESOLUTION_TOL * scale + roundoff {
        return Err(Error::InsufficientResolution(format!(
            "derivative of order {} unstable under stencil change (relative {:e})",
            order + 1,
            diff / scale
        )));
    }
    Ok(ext)
}

impl AlmostAnalytic {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn range(&self) -> (f64, f64) {
        self.samples.range()
    }

    /// `g^{(j)}(x)` for `j = 0..=order+1` from the nearest stencil; zero
    /// outside the sampled range.
    pub fn derivatives(&self, x: f64) -> Vec<f64> {
        let s = &self.samples;
        let (lo, hi) = s.range();
        if x < lo || x > hi {
            return alloc::vec![0.0; self.order + 2];
        }
        let (first, w) = self.stencil(x);
        (0..=self.order + 1)
            .map(|k| w[k].iter().zip(&s.values[first..first + self.width]).map(|(a, b)| a * b).sum())
            .collect()
    }

    fn stencil(&self, x: f64) -> (usize, Vec<Vec<f64>>) {
        let s = &self.samples;
        let n = s.values.len();
        let centre = ((x - s.start) / s.step).round() as isize;
        let first = (centre - (self.width as isize) / 2).clamp(0, (n - self.width) as isize) as usize;
        let nodes: Vec<f64> = (first..first + self.width).map(|j| s.node(j)).collect();
        (first, fornberg(x, &nodes, self.order + 1))
    }

    /// Highest derivative at an in-range `x` with the 1-norm of its weights.
    fn top_derivative(&self, x: f64) -> (f64, f64) {
        let (first, w) = self.stencil(x);
        let top = &w[self.order + 1];
        let value = top.iter().zip(&self.samples.values[first..first + self.width]).map(|(a, b)| a * b).sum();
        (value, top.iter().map(|v| v.abs()).sum())
    }

    fn from_derivatives(&self, d: &[f64], y: f64) -> (Complex, Complex) {
        let iy = Complex::new(0.0, y);
        let mut power = Complex::new(1.0, 0.0);
        let mut value = Complex::new(0.0, 0.0);
        let mut factorial = 1.0;
        for (j, dj) in d.iter().take(self.order + 1).enumerate() {
            if j > 0 {
                power *= iy;
                factorial *= j as f64;
            }
            value += power * (*dj / factorial);
        }
        let dbar = 0.5 * d[self.order + 1] * power / factorial;
        (value, dbar)
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.from_derivatives(&self.derivatives(z.re), z.im).0
    }

    /// `∂̄g̃(z) = ½(∂ₓ + i∂_y) g̃`.
    pub fn dbar(&self, z: Complex) -> Complex {
        self.from_derivatives(&self.derivatives(z.re), z.im).1
    }
}

/// Tensor quadrature settings for the Helffer–Sjöstrand integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsOptions {
    pub nodes_x: usize,
    pub nodes_y: usize,
    /// The extension is cut off smoothly between `|y| = height/2` and `height`.
    pub height: f64,
}

impl Default for HsOptions {
    fn default() -> Self {
        Self { nodes_x: 200, nodes_y: 200, height: 0.3 }
    }
}

const X_PANEL_NODES: usize = 8;

fn check_hermitian(a: &CMat) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!("matrix must be square, got {}×{}", a.nrows(), a.ncols())));
    }
    let residual = hermitian_residual(a);
    if residual > 1e-12 * max_abs_c(a).max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    Ok(())
}

/// `g(A) = (1/π) ∬ ∂̄(τ g̃)(z) (A − z)⁻¹ dx dy` over the sampled range times
/// `[−height, height]`, with `τ(y)` a smooth cutoff.
pub fn hs_functional_calculus(a: &CMat, g: &AlmostAnalytic, opts: &HsOptions) -> Result<CMat> {
    check_hermitian(a)?;
    let n = a.nrows();
    let (lo, hi) = g.range();
    // Gershgorin enclosure of the spectrum
    let mut spec_lo = f64::INFINITY;
    let mut spec_hi = f64::NEG_INFINITY;
    for i in 0..n {
        let radius: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
        spec_lo = spec_lo.min(a[(i, i)].re - radius);
        spec_hi = spec_hi.max(a[(i, i)].re + radius);
    }
    if n > 0 && (spec_lo < lo || spec_hi > hi) {
        return Err(Error::RectangleMissesSpectrum { lo, hi, spec_lo, spec_hi });
    }
    let height = opts.height;
    // uniform panels in x (the resolvent varies on every eigenvalue), one
    // Gauss rule in y clustering nodes at the real axis
    let xs = GaussLegendre::new(X_PANEL_NODES);
    let ys = GaussLegendre::new((opts.nodes_y / 2).max(2));
    let (xn, xw) = xs.composite(lo, hi, (opts.nodes_x / X_PANEL_NODES).max(1));
    let (yn, yw) = ys.composite(0.0, height, 1);
    let mut total = CMat::zeros(n, n);
    let identity = CMat::identity(n, n);
    for (&x, &wx) in xn.iter().zip(&xw) {
        let d = g.derivatives(x);
        if d.iter().all(|v| *v == 0.0) {
            continue;
        }
        for (&y0, &wy) in yn.iter().zip(&yw) {
            for y in [y0, -y0] {
                let s = 2.0 * y.abs() / height - 1.0;
                let tau = 1.0 - smooth_step(s);
                let dtau = -smooth_step_derivative(s) * 2.0 * y.signum() / height;
                let (value, dbar) = g.from_derivatives(&d, y);
                let weight = (tau * dbar + Complex::new(0.0, 0.5) * dtau * value) * (wx * wy);
                if weight == Complex::new(0.0, 0.0) {
                    continue;
                }
                let shifted = a - &identity * Complex::new(x, y);
                let inv = shifted
                    .lu()
                    .try_inverse()
                    .ok_or_else(|| Error::InsufficientResolution(format!("resolvent singular at {x}+{y}i")))?;
                total += inv * weight;
            }
        }
    }
    Ok(total * Complex::new(1.0 / PI, 0.0))
}

/// `‖(A − z)⁻¹‖₂` for Hermitian `A`, through the smallest singular value of
/// `A − z`.
pub fn resolvent_norm(a: &CMat, z: Complex) -> Result<f64> {
    check_hermitian(a)?;
    if z.im == 0.0 {
        return Err(Error::InvalidInput("resolvent norm needs Im z ≠ 0".into()));
    }
    let n = a.nrows();
    let shifted = a - CMat::identity(n, n) * z;
    let smallest = shifted.svd(false, false).singular_values.iter().fold(f64::INFINITY, |m, &s| m.min(s));
    Ok(1.0 / smallest)
}
