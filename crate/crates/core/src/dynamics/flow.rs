use super::hamiltonian::HamiltonianSystem;
use crate::linalg::RMat;
use crate::symplectic::SymplecticMatrix;
use crate::{Error, Result};
use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // libm-backed methods without std
use num_traits::Float;

/// Accuracy and budget of the flow integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowOptions {
    /// Local error allowed per unit time, relative to `1 + |y|`.
    pub tol: f64,
    pub max_steps: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_steps: 5_000_000 }
    }
}

impl FlowOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

// Dormand–Prince 5(4); the system is autonomous, so the nodes cᵢ are not needed
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Adaptive integrator for the joint system `ṁ = H_p(m)`,
/// `Ṁ = J Hess p(m) M`.
#[derive(Debug, Clone)]
pub struct FlowIntegrator<'a> {
    sys: &'a HamiltonianSystem,
    opts: FlowOptions,
    n: usize,
    t: f64,
    y: Vec<f64>,
    h: f64,
    steps: usize,
}

impl<'a> FlowIntegrator<'a> {
    /// Starts at `m` with `M = I` and `t = 0`.
    pub fn new(sys: &'a HamiltonianSystem, m: &[f64], opts: FlowOptions) -> Self {
        let d = 2 * sys.dof();
        Self::with_state(sys, 0.0, m, &RMat::identity(d, d), opts)
    }

    pub fn with_state(sys: &'a HamiltonianSystem, t: f64, m: &[f64], var: &RMat, opts: FlowOptions) -> Self {
        let n = sys.dof();
        let d = 2 * n;
        let mut y = Vec::with_capacity(d + d * d);
        y.extend_from_slice(&m[..d]);
        y.extend(var.iter().copied());
        Self { sys, opts, n, t, y, h: 0.0, steps: 0 }
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn point(&self) -> &[f64] {
        &self.y[..2 * self.n]
    }

    pub fn variational(&self) -> RMat {
        let d = 2 * self.n;
        RMat::from_column_slice(d, d, &self.y[d..])
    }

    fn rhs(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        let d = 2 * n;
        let m = &y[..d];
        let g = self.sys.gradient(m);
        let hess = self.sys.hessian(m);
        for i in 0..n {
            out[i] = g[n + i];
            out[n + i] = -g[i];
        }
        // (J Hess)_{i·} = Hess_{n+i,·}, (J Hess)_{n+i,·} = −Hess_{i,·}
        let mut jh = RMat::zeros(d, d);
        for i in 0..n {
            jh.row_mut(i).copy_from(&hess.row(n + i));
            jh.row_mut(n + i).copy_from(&(-hess.row(i)));
        }
        let var = RMat::from_column_slice(d, d, &y[d..]);
        let dv = jh * var;
        out[d..].copy_from_slice(dv.as_slice());
    }

    /// Takes one accepted step towards `target` without passing it.
    pub fn step_toward(&mut self, target: f64) -> Result<()> {
        let dir = if target >= self.t { 1.0 } else { -1.0 };
        let remaining = (target - self.t).abs();
        if remaining == 0.0 {
            return Ok(());
        }
        if self.h == 0.0 || self.h.signum() != dir {
            self.h = dir * remaining.min(0.05);
        }
        let len = self.y.len();
        let mut k = vec![vec![0.0; len]; 7];
        let mut tmp = vec![0.0; len];
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(Error::StepUnderflow { last_time: self.t, step: self.h });
            }
            let mut h = self.h;
            let last = h.abs() >= remaining;
            if last {
                h = dir * remaining;
            }
            if h.abs() < 1e-14 * self.t.abs().max(1.0) && !last {
                return Err(Error::StepUnderflow { last_time: self.t, step: h });
            }
            self.rhs(&self.y, &mut k[0]);
            for s in 1..7 {
                for i in 0..len {
                    let mut acc = self.y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        acc += h * A[s][j] * kj[i];
                    }
                    tmp[i] = acc;
                }
                self.rhs(&tmp, &mut k[s]);
            }
            // tmp holds the fifth-order solution (row 7 of A equals b)
            let mut err: f64 = 0.0;
            for i in 0..len {
                let mut e = 0.0;
                for (s, ks) in k.iter().enumerate() {
                    e += E[s] * ks[i];
                }
                let scale = self.opts.tol * (1.0 + self.y[i].abs().max(tmp[i].abs())) * h.abs().max(1e-300);
                err = err.max((h * e).abs() / scale);
            }
            self.steps += 1;
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.25)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.t = if last { target } else { self.t + h };
                self.y.copy_from_slice(&tmp);
                // a step clipped at the target says nothing about the natural step
                if !last {
                    self.h = h * factor;
                }
                return Ok(());
            }
            self.h = h * factor;
        }
    }

    /// Integrates up to exactly `target`.
    pub fn advance_to(&mut self, target: f64) -> Result<()> {
        while self.t != target {
            self.step_toward(target)?;
        }
        Ok(())
    }
}

/// `(Φ_t(m), DΦ_t(m))`; `t = 0` returns `(m, I)` exactly.
pub fn integrate_flow(sys: &HamiltonianSystem, m: &[f64], t: f64, tol: f64) -> Result<(Vec<f64>, SymplecticMatrix)> {
    let d = 2 * sys.dof();
    if !t.is_finite() || !(tol > 0.0) {
        return Err(Error::InvalidInput(alloc::format!("flow time {t} and tolerance {tol} must be finite and positive")));
    }
    if t == 0.0 {
        return Ok((m[..d].to_vec(), SymplecticMatrix::identity(d / 2)));
    }
    let mut it = FlowIntegrator::new(sys, m, FlowOptions::with_tol(tol));
    it.advance_to(t)?;
    Ok((it.point().to_vec(), SymplecticMatrix::new_unchecked(it.variational())))
}
