use crate::numerics::{smooth_step, smooth_step_derivative};
use crate::{Error, Result};
use alloc::format;

/// Smooth cutoff `χ`: equal to 1 on `[a, b]`, 0 outside `[a − r, b + r]`,
/// with `C^∞` rolloffs of width `r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    lo: f64,
    hi: f64,
    rolloff: f64,
}

impl EnergyWindow {
    pub fn new(lo: f64, hi: f64, rolloff: f64) -> Result<Self> {
        if !(lo <= hi) || !(rolloff > 0.0) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidInput(format!("window needs lo ≤ hi and rolloff > 0, got [{lo}, {hi}] r = {rolloff}")));
        }
        Ok(Self { lo, hi, rolloff })
    }

    /// Rolloff of 10% of the plateau length.
    pub fn with_default_rolloff(lo: f64, hi: f64) -> Result<Self> {
        Self::new(lo, hi, 0.1 * (hi - lo))
    }

    pub fn plateau(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    /// Closed support `[a − r, b + r]`.
    pub fn support(&self) -> (f64, f64) {
        (self.lo - self.rolloff, self.hi + self.rolloff)
    }

    pub fn eval(&self, e: f64) -> f64 {
        let r = self.rolloff;
        smooth_step((e - self.lo + r) / r) * smooth_step((self.hi + r - e) / r)
    }

    pub fn derivative(&self, e: f64) -> f64 {
        let r = self.rolloff;
        let a = (e - self.lo + r) / r;
        let b = (self.hi + r - e) / r;
        (smooth_step_derivative(a) * smooth_step(b) - smooth_step(a) * smooth_step_derivative(b)) / r
    }
}
