use crate::numerics::{bump, GaussLegendre};
use crate::{Complex, Error, Result};
use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;
use once_cell::race::OnceBox;

/// One bump `a · exp(1 − 1/(1 − s²))`, `s = (t − t₀)/δ`, of `f̂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpPiece {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: Complex,
}

/// Beyond this value of `|λ|δ` the transform of a unit bump is below
/// `10⁻¹⁵` and is returned as zero.
const NEGLIGIBLE_FREQUENCY: f64 = 1000.0;
/// Spacing of the tabulated unit transform.
const TABLE_STEP: f64 = 1.0 / 16.0;
/// Points of the local interpolating polynomial.
const STENCIL: usize = 10;

static UNIT_TABLE: OnceBox<Vec<f64>> = OnceBox::new();

/// Band-limited test function given by its Fourier transform `f̂`, a finite
/// sum of smooth bumps (`f̂(t₀) = a` for an isolated piece).
#[derive(Debug, Clone)]
pub struct TestFunction {
    pieces: Vec<BumpPiece>,
}

impl TestFunction {
    pub fn new(pieces: Vec<BumpPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput("test function needs at least one bump".into()));
        }
        for p in &pieces {
            if !(p.half_width > 0.0) || !p.center.is_finite() {
                return Err(Error::InvalidInput(format!("bad bump at t₀ = {} with δ = {}", p.center, p.half_width)));
            }
        }
        Ok(Self { pieces })
    }

    /// A single bump with `f̂(t₀) = 1`.
    pub fn bump(center: f64, half_width: f64) -> Result<Self> {
        Self::new(alloc::vec![BumpPiece { center, half_width, amplitude: Complex::new(1.0, 0.0) }])
    }

    /// Bumps at `±t₀` with conjugate amplitudes, so that `f` is real.
    pub fn symmetric_pair(center: f64, half_width: f64, amplitude: Complex) -> Result<Self> {
        Self::new(alloc::vec![
            BumpPiece { center, half_width, amplitude },
            BumpPiece { center: -center, half_width, amplitude: amplitude.conj() },
        ])
    }

    pub fn pieces(&self) -> &[BumpPiece] {
        &self.pieces
    }

    /// Closed intervals `[t₀ − δ, t₀ + δ]` of the pieces.
    pub fn support(&self) -> Vec<(f64, f64)> {
        self.pieces.iter().map(|p| (p.center - p.half_width, p.center + p.half_width)).collect()
    }

    /// Smallest interval containing the support.
    pub fn support_hull(&self) -> (f64, f64) {
        self.support().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &(l, h)| (a.min(l), b.max(h)))
    }

    /// `true` when some point of `[lo, hi]` lies in the support.
    pub fn support_meets(&self, lo: f64, hi: f64) -> bool {
        self.support().iter().any(|&(l, h)| l < hi && lo < h)
    }

    pub fn fhat(&self, t: f64) -> Complex {
        self.pieces.iter().map(|p| p.amplitude * bump((t - p.center) / p.half_width)).sum()
    }

    /// `f(λ) = (1/2π) Σ a δ e^{iλt₀} B(λδ)` with `B(w) = ∫ bump(s) cos(ws) ds`.
    pub fn eval(&self, lambda: f64) -> Complex {
        let mut acc = Complex::new(0.0, 0.0);
        for p in &self.pieces {
            let b = unit_transform(lambda * p.half_width);
            if b != 0.0 {
                acc += p.amplitude * Complex::from_polar(p.half_width * b, lambda * p.center);
            }
        }
        acc / (2.0 * PI)
    }

    /// `f` is real-valued iff `f̂(−t) = conj f̂(t)`; checked on the pieces.
    pub fn is_real_valued(&self) -> bool {
        self.pieces.iter().all(|p| {
            self.pieces.iter().any(|q| {
                (q.center + p.center).abs() < 1e-14 * (1.0 + p.center.abs())
                    && (q.half_width - p.half_width).abs() < 1e-14 * p.half_width
                    && (q.amplitude - p.amplitude.conj()).norm() < 1e-14 * (1.0 + p.amplitude.norm())
            })
        })
    }

    /// Radius beyond which `|f(λ)| ≤ tol · Σ|a|δ/2π`, from a scan of the
    /// unit-bump transform (which is not monotone but has a decaying
    /// envelope).
    pub fn decay_radius(&self, tol: f64) -> f64 {
        let step = 0.25;
        let mut last = 0.0;
        let mut w = 0.0;
        while w <= NEGLIGIBLE_FREQUENCY {
            if unit_transform(w).abs() > tol {
                last = w;
            }
            w += step;
        }
        let min_width = self.pieces.iter().map(|p| p.half_width).fold(f64::INFINITY, f64::min);
        (last + step) / min_width
    }
}

/// `∫_{−1}^{1} bump(s) cos(ws) ds` by composite Gauss–Legendre with three
/// oscillations per panel.
fn unit_transform_direct(rule: &GaussLegendre, w: f64) -> f64 {
    let panels = 8 + (w / (6.0 * PI)).ceil() as usize;
    2.0 * rule.integrate(0.0, 1.0, panels, |s| bump(s) * (w * s).cos())
}

/// The unit transform interpolated from a table built on first use.
fn unit_transform(w: f64) -> f64 {
    let w = w.abs();
    if w > NEGLIGIBLE_FREQUENCY {
        return 0.0;
    }
    let table = UNIT_TABLE.get_or_init(|| {
        let rule = GaussLegendre::new(24);
        let n = (NEGLIGIBLE_FREQUENCY / TABLE_STEP) as usize + STENCIL;
        alloc::boxed::Box::new((0..=n).map(|j| unit_transform_direct(&rule, j as f64 * TABLE_STEP)).collect())
    });
    let u = w / TABLE_STEP;
    let first = ((u.floor() as isize) - (STENCIL as isize / 2 - 1)).max(0) as usize;
    // barycentric form on equispaced nodes: weights (−1)^j C(m−1, j)
    let (mut num, mut den) = (0.0, 0.0);
    let mut binom = 1.0;
    for j in 0..STENCIL {
        let d = u - (first + j) as f64;
        if d == 0.0 {
            return table[first + j];
        }
        let weight = if j % 2 == 0 { binom } else { -binom } / d;
        num += weight * table[first + j];
        den += weight;
        binom = binom * (STENCIL - 1 - j) as f64 / (j + 1) as f64;
    }
    num / den
}
