use super::lagrangian::{diagonal_frame, graph_lagrangian, hk_index, mixed_vertical_frame, AmbientForm, LagrangianFrame};
use super::matrix::{random_symmetric, SymplecticMatrix};
use super::path::SymplecticPath;
use super::signature::DEFAULT_SIGNATURE_TOL;
use crate::linalg::{orthonormal_columns, singular_values, RMat};
use crate::{Error, Result};
use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tuning of the transversal search in [`maslov_index_path`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaslovOptions {
    /// Zero threshold for HK signatures.
    pub signature_tol: f64,
    /// Required smallest singular value of stacked frames.
    pub transversal_tol: f64,
    /// Evaluations per segment when certifying transversality.
    pub samples_per_segment: usize,
    /// Maximal number of dyadic refinements of a segment.
    pub max_depth: u32,
    /// Random candidates tried per segment after the fixed ones.
    pub random_candidates: usize,
    pub seed: u64,
}

impl Default for MaslovOptions {
    fn default() -> Self {
        Self {
            signature_tol: DEFAULT_SIGNATURE_TOL,
            transversal_tol: 1e-3,
            samples_per_segment: 16,
            max_depth: 20,
            random_candidates: 24,
            seed: 0x5eed,
        }
    }
}

/// `μ(Γ) = ½ Σⱼ (s(Γ(tⱼ₋₁), Δ, Mʲ) − s(Γ(tⱼ), Δ, Mʲ))`, with `Γ(t)` the graph of
/// `S(t)` in the doubled space and each `Mʲ` transversal to `Δ` and to
/// `Γ(t)` on `[tⱼ₋₁, tⱼ]`.
///
/// Fails with [`Error::InvalidInput`] when the half-sum is not an integer,
/// which can only happen if an endpoint has `ker(S − I)` of odd dimension.
pub fn maslov_index_path(path: &SymplecticPath, opts: &MaslovOptions) -> Result<i32> {
    let twice = maslov_index_path_twice(path, opts)?;
    if twice % 2 != 0 {
        return Err(Error::InvalidInput(format!(
            "half-integer Maslov index {twice}/2: an endpoint has odd-dimensional fixed space"
        )));
    }
    Ok(twice / 2)
}

/// `2μ(Γ)`, always an integer.
pub fn maslov_index_path_twice(path: &SymplecticPath, opts: &MaslovOptions) -> Result<i32> {
    let n = path.dim() / 2;
    if n == 0 {
        return Ok(0);
    }
    let mut search = Search {
        path,
        opts,
        delta: diagonal_frame(n),
        fixed: [mixed_vertical_frame(n), mixed_horizontal_frame(n)],
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        n,
    };
    let times: Vec<f64> = path.samples().iter().map(|(t, _)| *t).collect();
    let mut total = 0;
    for w in times.windows(2) {
        total += search.segment(w[0], w[1], 0)?;
    }
    Ok(total)
}

/// `L_h = ℝⁿ ⊕ {0} ⊕ {0} ⊕ ℝⁿ`: vectors `(x, 0, 0, η)`.
fn mixed_horizontal_frame(n: usize) -> LagrangianFrame {
    let mut b = RMat::zeros(4 * n, 2 * n);
    for i in 0..n {
        b[(i, i)] = 1.0;
        b[(3 * n + i, n + i)] = 1.0;
    }
    LagrangianFrame::with_form(b, AmbientForm::Doubled).expect("coordinate Lagrangian")
}

struct Search<'a> {
    path: &'a SymplecticPath,
    opts: &'a MaslovOptions,
    delta: LagrangianFrame,
    fixed: [LagrangianFrame; 2],
    rng: ChaCha8Rng,
    n: usize,
}

impl Search<'_> {
    /// Contribution `s(Γ(a), Δ, M) − s(Γ(b), Δ, M)` of `[a, b]`, refining
    /// until a certified transversal exists.
    fn segment(&mut self, a: f64, b: f64, depth: u32) -> Result<i32> {
        let k = self.opts.samples_per_segment.max(2);
        let frames: Vec<LagrangianFrame> = (0..=k)
            .map(|i| {
                let t = a + (b - a) * i as f64 / k as f64;
                graph_lagrangian(&SymplecticMatrix::new_unchecked(self.path.eval(t)))
            })
            .collect();
        let motion = frames.windows(2).map(|w| subspace_gap(&w[0], &w[1])).fold(0.0f64, f64::max);
        if let Some(m) = self.find_transversal(&frames, motion) {
            let tol = self.opts.signature_tol;
            let s0 = hk_index(&frames[0], &self.delta, &m, tol)?;
            let s1 = hk_index(&frames[k], &self.delta, &m, tol)?;
            return Ok(s0 - s1);
        }
        if depth >= self.opts.max_depth {
            return Err(Error::PathTooWild { start: a, end: b });
        }
        let mid = 0.5 * (a + b);
        Ok(self.segment(a, mid, depth + 1)? + self.segment(mid, b, depth + 1)?)
    }

    fn find_transversal(&mut self, frames: &[LagrangianFrame], motion: f64) -> Option<LagrangianFrame> {
        let accept = |m: &LagrangianFrame, delta: &LagrangianFrame, tol: f64| {
            let mut worst = m.transversality(delta);
            for f in frames {
                if worst < tol {
                    return false;
                }
                worst = worst.min(m.transversality(f));
            }
            // samples must be dense enough that Γ cannot reach M in between
            worst >= tol && motion <= 0.5 * worst
        };
        let tol = self.opts.transversal_tol;
        for m in &self.fixed {
            if accept(m, &self.delta, tol) {
                return Some(m.clone());
            }
        }
        for _ in 0..self.opts.random_candidates {
            let m = self.random_candidate();
            if accept(&m, &self.delta, tol) {
                return Some(m);
            }
        }
        None
    }

    /// Graph of a random symmetric map over one of the two coordinate
    /// Lagrangians, towards the other; the two are paired by the dot
    /// product, so symmetric maps give Lagrangian graphs.
    fn random_candidate(&mut self) -> LagrangianFrame {
        let n2 = 2 * self.n;
        let scale = 10f64.powf(self.rng.random_range(-1.0..=1.0));
        let c = random_symmetric(n2, scale, &mut self.rng);
        let (base, dir) = if self.rng.random_bool(0.5) { (0, 1) } else { (1, 0) };
        let b = self.fixed[base].basis() + self.fixed[dir].basis() * c;
        LagrangianFrame::with_form(orthonormal_columns(&b), AmbientForm::Doubled).expect("graph of a symmetric map")
    }
}

/// Sine of the largest principal angle between two subspaces.
fn subspace_gap(a: &LagrangianFrame, b: &LagrangianFrame) -> f64 {
    let qa = a.basis();
    let qb = b.basis();
    let r = qa - qb * (qb.transpose() * qa);
    singular_values(&r).first().copied().unwrap_or(0.0)
}
