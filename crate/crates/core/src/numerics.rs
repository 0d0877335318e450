//! Quadrature rules and smooth cutoff profiles shared by the other modules.

use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds an `n`-point rule by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss–Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Nodes and weights mapped to `[a, b]` split into `panels` equal panels.
    pub fn composite(&self, a: f64, b: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
        let panels = panels.max(1);
        let width = (b - a) / panels as f64;
        let mut xs = Vec::with_capacity(panels * self.len());
        let mut ws = Vec::with_capacity(panels * self.len());
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let mid = lo + 0.5 * width;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                xs.push(mid + 0.5 * width * x);
                ws.push(0.5 * width * w);
            }
        }
        (xs, ws)
    }

    /// Composite integral of a real function over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let (xs, ws) = self.composite(a, b, panels);
        xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Unit-peak bump `exp(1 − 1/(1 − s²))` on `(−1, 1)`, zero outside.
#[inline]
pub fn bump(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

/// Derivative of [`bump`].
#[inline]
pub fn bump_derivative(s: f64) -> f64 {
    let q = 1.0 - s * s;
    if q <= 0.0 {
        0.0
    } else {
        -2.0 * s / (q * q) * bump(s)
    }
}

/// C^∞ step: 0 for `s ≤ 0`, 1 for `s ≥ 1`, built from `e^{−1/s}`.
#[inline]
pub fn smooth_step(s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    if s >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    a / (a + b)
}

/// Derivative of [`smooth_step`].
#[inline]
pub fn smooth_step_derivative(s: f64) -> f64 {
    if s <= 0.0 || s >= 1.0 {
        return 0.0;
    }
    let a = (-1.0 / s).exp();
    let b = (-1.0 / (1.0 - s)).exp();
    let da = a / (s * s);
    let db = b / ((1.0 - s) * (1.0 - s));
    (da * b + a * db) / ((a + b) * (a + b))
}

/// Evenly spaced points including both ends.
pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Least-squares line through `(x, y)`; returns slope, its standard error,
/// and the coefficient of determination.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let se = if xs.len() > 2 {
        (sse / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    (slope, se, r2)
}

/// Bracketed root of a continuous function (bisection polished by secant
/// steps kept inside the bracket).
pub fn find_root<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> Option<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Some(lo);
    }
    if fhi == 0.0 {
        return Some(hi);
    }
    if flo.signum() == fhi.signum() {
        return None;
    }
    let mut fhi = fhi;
    for _ in 0..200 {
        let mut mid = lo - flo * (hi - lo) / (fhi - flo);
        let span = hi - lo;
        if !(mid > lo + 0.05 * span && mid < hi - 0.05 * span) {
            mid = 0.5 * (lo + hi);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
        if (hi - lo).abs() <= tol * (1.0 + mid.abs()) {
            return Some(0.5 * (lo + hi));
        }
    }
    Some(0.5 * (lo + hi))
}

/// Real polynomial `Σ cₖ xᵏ` with coefficients in ascending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self { coeffs }
    }

    /// `c·xᵏ`.
    pub fn monomial(k: usize, c: f64) -> Self {
        let mut coeffs = alloc::vec![0.0; k + 1];
        coeffs[k] = c;
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self { coeffs: alloc::vec![0.0] };
        }
        Self {
            coeffs: self.coeffs.iter().enumerate().skip(1).map(|(k, &c)| k as f64 * c).collect(),
        }
    }

    /// `j`-th derivative at `x`.
    pub fn eval_derivative(&self, j: usize, x: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .skip(j)
            .map(|(k, &c)| {
                let falling: f64 = ((k - j + 1)..=k).map(|i| i as f64).product();
                c * falling * x.powi((k - j) as i32)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = GaussLegendre::new(8);
        // degree 15 is exact for 8 nodes
        let v = rule.integrate(-1.0, 1.0, 1, |x| x.powi(14) + 3.0 * x.powi(3));
        assert!((v - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = rule.weights().iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn composite_rule_on_oscillatory_integrand() {
        let rule = GaussLegendre::new(16);
        let v = rule.integrate(0.0, 10.0, 20, |x| (3.0 * x).cos());
        assert!((v - (30.0f64).sin() / 3.0).abs() < 1e-13);
    }

    #[test]
    fn smooth_step_is_monotone_and_matches_derivative() {
        let mut prev = 0.0;
        for i in 1..100 {
            let s = i as f64 / 100.0;
            let v = smooth_step(s);
            assert!(v >= prev);
            prev = v;
            let d = (smooth_step(s + 1e-6) - smooth_step(s - 1e-6)) / 2e-6;
            assert!((d - smooth_step_derivative(s)).abs() < 1e-6);
        }
        assert_eq!(smooth_step(0.0), 0.0);
        assert_eq!(smooth_step(1.0), 1.0);
    }

    #[test]
    fn bump_has_unit_peak_and_compact_support() {
        assert_eq!(bump(0.0), 1.0);
        assert_eq!(bump(1.0), 0.0);
        assert_eq!(bump(-1.5), 0.0);
        assert!(bump(0.999) < 1e-200);
        let d = (bump(0.4 + 1e-6) - bump(0.4 - 1e-6)) / 2e-6;
        assert!((d - bump_derivative(0.4)).abs() < 1e-8);
    }

    #[test]
    fn linear_fit_recovers_slope() {
        let xs = [0.0, 1.0, 2.0, 3.0];
        let ys = [1.0, 3.0, 5.0, 7.0];
        let (s, se, r2) = linear_fit(&xs, &ys);
        assert!((s - 2.0).abs() < 1e-14);
        assert!(se < 1e-12);
        assert!((r2 - 1.0).abs() < 1e-14);
    }

    #[test]
    fn polynomial_derivatives() {
        let p = Polynomial::new(alloc::vec![1.0, -2.0, 0.0, 3.0]);
        assert_eq!(p.eval(2.0), 21.0);
        assert_eq!(p.derivative().eval(2.0), 34.0);
        assert_eq!(p.eval_derivative(2, 2.0), 36.0);
        assert_eq!(p.eval_derivative(3, 5.0), 18.0);
        assert_eq!(p.eval_derivative(4, 5.0), 0.0);
        assert_eq!(p.degree(), 3);
    }

    #[test]
    fn root_finder_hits_cubic_root() {
        let r = find_root(|x| x * x * x - 2.0, 0.0, 2.0, 1e-15).unwrap();
        assert!((r - 2f64.powf(1.0 / 3.0)).abs() < 1e-13);
        assert!(find_root(|x| x * x + 1.0, -1.0, 1.0, 1e-12).is_none());
    }
}
