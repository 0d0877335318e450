use super::flow::{FlowIntegrator, FlowOptions};
use super::hamiltonian::HamiltonianSystem;
use super::orbit::{ClosedOrbit, OrbitSample};
use crate::linalg::RMat;
use crate::symplectic::{maslov_index_path, MaslovOptions, SymplecticMatrix, SymplecticPath};
use crate::{Error, Result};
use alloc::sync::Arc;
use alloc::vec::Vec;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Smallest admissible norm or pairing during frame construction.
const FRAME_TOL: f64 = 1e-8;

/// Pivot choice `(e-index, f-index)` per transversal pair.
pub type FramePivots = Vec<(usize, usize)>;

fn omega(n: usize, a: &[f64], b: &[f64]) -> f64 {
    (0..n).map(|i| a[i] * b[n + i] - a[n + i] * b[i]).sum()
}

/// Symplectic basis `(e₁..e_{n−1}, f₁..f_{n−1})` of the symplectic
/// complement of `span{H_p, ∇p/|∇p|²}` at `m`, returned as columns.
///
/// Coordinate vectors are projected and orthogonalised in the order given by
/// `pivots`; when `None`, pivots are picked greedily (largest projected norm,
/// then largest pairing) and returned so that the same frame family can be
/// followed along the orbit.
pub fn transversal_frame(sys: &HamiltonianSystem, m: &[f64], pivots: Option<&[(usize, usize)]>) -> Result<(RMat, FramePivots)> {
    let n = sys.dof();
    let d = 2 * n;
    let g = sys.gradient(m);
    let g2: f64 = g.iter().map(|x| x * x).sum();
    if g2.sqrt() < FRAME_TOL {
        return Err(Error::NotPrincipalType { gradient_norm: g2.sqrt() });
    }
    let v = sys.hamilton_field(m);
    let w: Vec<f64> = g.iter().map(|x| x / g2).collect();
    let mut cand: Vec<Vec<f64>> = (0..d)
        .map(|k| {
            // P(u) = u − ω(u, w) v + ω(u, v) w with u = e_k
            let mut u = alloc::vec![0.0; d];
            u[k] = 1.0;
            let a = omega(n, &u, &w);
            let b = omega(n, &u, &v);
            for i in 0..d {
                u[i] += -a * v[i] + b * w[i];
            }
            u
        })
        .collect();
    let mut used = alloc::vec![false; d];
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let mut frame = RMat::zeros(d, 2 * (n - 1));
    for pair in 0..n - 1 {
        let (ie, jf) = match pivots {
            Some(p) => p[pair],
            None => {
                let norm = |u: &Vec<f64>| u.iter().map(|x| x * x).sum::<f64>();
                let ie = (0..d).filter(|&k| !used[k]).fold(None, |best: Option<usize>, k| match best {
                    Some(b) if norm(&cand[b]) >= norm(&cand[k]) => Some(b),
                    _ => Some(k),
                });
                let ie = ie.ok_or(Error::TransversalityLoss { time: 0.0 })?;
                let jf = (0..d).filter(|&k| !used[k] && k != ie).fold(None, |best: Option<usize>, k| match best {
                    Some(b) if omega(n, &cand[ie], &cand[b]).abs() >= omega(n, &cand[ie], &cand[k]).abs() => Some(b),
                    _ => Some(k),
                });
                (ie, jf.ok_or(Error::TransversalityLoss { time: 0.0 })?)
            }
        };
        used[ie] = true;
        used[jf] = true;
        chosen.push((ie, jf));
        let en: f64 = cand[ie].iter().map(|x| x * x).sum::<f64>().sqrt();
        if en < FRAME_TOL {
            return Err(Error::TransversalityLoss { time: 0.0 });
        }
        let e: Vec<f64> = cand[ie].iter().map(|x| x / en).collect();
        let pairing = omega(n, &e, &cand[jf]);
        if pairing.abs() < FRAME_TOL {
            return Err(Error::TransversalityLoss { time: 0.0 });
        }
        let f: Vec<f64> = cand[jf].iter().map(|x| x / pairing).collect();
        for u in cand.iter_mut() {
            let a = omega(n, u, &f);
            let b = omega(n, u, &e);
            for i in 0..d {
                u[i] += -a * e[i] + b * f[i];
            }
        }
        for i in 0..d {
            frame[(i, pair)] = e[i];
            frame[(i, n - 1 + pair)] = f[i];
        }
    }
    Ok((frame, chosen))
}

/// Coordinates `(a, b)` with `a_i = ω(u, f_i)`, `b_i = ω(e_i, u)` of each
/// column `u`; the `H_p` and `∇p` components drop out.
pub fn frame_coordinates(frame: &RMat, u: &RMat) -> RMat {
    let d = frame.nrows();
    let n = d / 2;
    let r = frame.ncols() / 2;
    let mut out = RMat::zeros(2 * r, u.ncols());
    for c in 0..u.ncols() {
        let col: Vec<f64> = u.column(c).iter().copied().collect();
        for i in 0..r {
            let e: Vec<f64> = frame.column(i).iter().copied().collect();
            let f: Vec<f64> = frame.column(r + i).iter().copied().collect();
            out[(i, c)] = omega(n, &col, &f);
            out[(r + i, c)] = omega(n, &e, &col);
        }
    }
    out
}

pub(crate) fn reduce_monodromy_at(sys: &HamiltonianSystem, m: &[f64], monodromy: &SymplecticMatrix) -> Result<SymplecticMatrix> {
    let (frame, _) = transversal_frame(sys, m, None)?;
    SymplecticMatrix::new(frame_coordinates(&frame, &(monodromy.matrix() * &frame)))
}

/// Linearised Poincaré map `dC` of the orbit in the transversal frame at
/// its base point (`0 × 0` for one degree of freedom).
pub fn reduce_monodromy(orbit: &ClosedOrbit) -> Result<SymplecticMatrix> {
    reduce_monodromy_at(&orbit.system, &orbit.point, &orbit.monodromy)
}

/// Verifies that the pivot family chosen at `t = 0` stays well conditioned
/// at every stored sample.
pub(crate) fn check_frame_along(sys: &HamiltonianSystem, samples: &[OrbitSample]) -> Result<()> {
    let (_, pivots) = transversal_frame(sys, &samples[0].point, None)?;
    for s in samples {
        transversal_frame(sys, &s.point, Some(&pivots)).map_err(|e| match e {
            Error::TransversalityLoss { .. } => Error::TransversalityLoss { time: s.t },
            other => other,
        })?;
    }
    Ok(())
}

/// `det(dC^k − I)` for one repetition count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NondegeneracyCheck {
    pub k: i32,
    pub determinant: f64,
    pub nondegenerate: bool,
}

/// Evaluates `det(dC^k − I)` for `1 ≤ |k| ≤ max_k`; a repetition is flagged
/// degenerate when `|det| < tol`.
pub fn check_nondegeneracy(reduced: &SymplecticMatrix, max_k: i32, tol: f64) -> Vec<NondegeneracyCheck> {
    (-max_k..=max_k)
        .filter(|&k| k != 0)
        .map(|k| {
            let determinant = reduced.fixed_point_determinant(k);
            NondegeneracyCheck { k, determinant, nondegenerate: determinant.abs() >= tol }
        })
        .collect()
}

/// Number of sign changes per period of the velocity `ẋ` projected on its
/// principal direction (2 for a libration, 0 for a rotation).
pub fn turning_points(orbit: &ClosedOrbit) -> usize {
    let n = orbit.system.dof();
    let samples = &orbit.samples[..orbit.samples.len() - 1];
    let velocities: Vec<Vec<f64>> = samples.iter().map(|s| orbit.system.hamilton_field(&s.point)[..n].to_vec()).collect();
    let mut cov = RMat::zeros(n, n);
    for v in &velocities {
        for i in 0..n {
            for j in 0..n {
                cov[(i, j)] += v[i] * v[j];
            }
        }
    }
    let eig = cov.symmetric_eigen();
    let top = eig.eigenvalues.imax();
    let dir = eig.eigenvectors.column(top);
    let scale = velocities.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    let signs: Vec<f64> = velocities
        .iter()
        .map(|v| (0..n).map(|i| v[i] * dir[i]).sum::<f64>())
        .filter(|s| s.abs() > 1e-12 * scale)
        .map(f64::signum)
        .collect();
    if signs.is_empty() {
        return 0;
    }
    (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count()
}

/// Path `t ↦ R(t)` on `[0, |k| T]` of transversal coordinates of
/// `DΦ_{±t} F₀`, built from the stored samples and `dC`.
pub fn transversal_path(orbit: &ClosedOrbit, k: i32) -> Result<SymplecticPath> {
    let (frame0, pivots) = transversal_frame(&orbit.system, &orbit.point, None)?;
    let sys = orbit.system.clone();
    let samples: Arc<Vec<OrbitSample>> = orbit.samples.clone();
    let period = orbit.period;
    let reduced = orbit.reduced.matrix().clone();
    let reduced_inv = orbit.reduced.inverse().into_matrix();
    let flow = FlowOptions::with_tol(orbit.flow_tol);
    let dt = period / (samples.len() - 1) as f64;
    let sign = if k < 0 { -1.0 } else { 1.0 };
    let base = move |s: f64| -> RMat {
        let j = ((s / dt).floor().max(0.0) as usize).min(samples.len() - 2);
        let start = &samples[j];
        let mut it = FlowIntegrator::with_state(&sys, start.t, &start.point, &start.variational, flow);
        if it.advance_to(s).is_err() {
            return RMat::from_element(frame0.ncols(), frame0.ncols(), f64::NAN);
        }
        match transversal_frame(&sys, it.point(), Some(&pivots)) {
            Ok((frame, _)) => frame_coordinates(&frame, &(it.variational() * &frame0)),
            Err(_) => RMat::from_element(frame0.ncols(), frame0.ncols(), f64::NAN),
        }
    };
    let eval = move |t: f64| -> RMat {
        let tau = sign * t;
        let j = (tau / period).floor();
        let r = (tau - j * period).clamp(0.0, period);
        let power = if j >= 0.0 { &reduced } else { &reduced_inv };
        base(r) * crate::linalg::matrix_power(power, j.abs() as u32)
    };
    let n_samples = 32 * k.unsigned_abs() as usize + 1;
    SymplecticPath::from_fn(0.0, k.unsigned_abs() as f64 * period, n_samples, eval)
}

pub(crate) fn orbit_maslov_parts(orbit: &ClosedOrbit, k: i32, opts: &MaslovOptions) -> Result<(i32, i32)> {
    let transversal = if orbit.system.dof() == 1 { 0 } else { maslov_index_path(&transversal_path(orbit, k)?, opts)? };
    Ok((transversal, transversal - k * orbit.turning_points as i32))
}

/// Maslov index `ν_k` of the `k`-th iterate: the transversal Maslov index
/// minus `k` times the number of turning points.
pub fn orbit_maslov(orbit: &ClosedOrbit, k: i32, opts: &MaslovOptions) -> Result<i32> {
    if k == 0 {
        return Err(Error::InvalidInput("repetition count must be nonzero".into()));
    }
    Ok(orbit_maslov_parts(orbit, k, opts)?.1)
}
