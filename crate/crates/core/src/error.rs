use alloc::string::String;
use alloc::vec::Vec;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric within tolerance (residual {residual:e})")]
    NotSymmetric { residual: f64 },

    #[error("matrix is not Hermitian within tolerance (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not symplectic (‖SᵀJS − J‖∞ = {residual:e}, det = {det})")]
    NotSymplectic { residual: f64, det: f64 },

    #[error("subspace is not Lagrangian (isotropy {isotropy:e}, rank ratio {rank_ratio:e})")]
    NotLagrangian { isotropy: f64, rank_ratio: f64 },

    #[error("phase not graph-like: det φ''_xη = {det_beta:e}")]
    PhaseNotGraphLike { det_beta: f64 },

    #[error("path too wild: no transversal Lagrangian found on [{start}, {end}]")]
    PathTooWild { start: f64, end: f64 },

    #[error("step size underflow at t = {last_time} (step {step:e})")]
    StepUnderflow { last_time: f64, step: f64 },

    #[error("no return to the section within time budget {budget}")]
    NoReturn { budget: f64 },

    #[error("Newton iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NewtonDiverged { iterations: usize, residual: f64 },

    #[error("degenerate section: |⟨n, H_p⟩| / ‖H_p‖ = {ratio:e}")]
    DegenerateSection { ratio: f64 },

    #[error("orbit is not principal type at the base point (‖dp‖ = {gradient_norm:e})")]
    NotPrincipalType { gradient_norm: f64 },

    #[error("transversal frame degenerates at t = {time}")]
    TransversalityLoss { time: f64 },

    #[error("gradient disagrees with finite differences (relative error {relative_error:e})")]
    GradientMismatch { relative_error: f64 },

    #[error("energy window not resolved: truncation {given} below required {required}")]
    WindowNotResolved { given: usize, required: usize },

    #[error("spectrum incomplete on [{needed_lo}, {needed_hi}] (covered [{covered_lo}, {covered_hi}])")]
    IncompleteSpectrum {
        needed_lo: f64,
        needed_hi: f64,
        covered_lo: f64,
        covered_hi: f64,
    },

    #[error("insufficient resolution: {0}")]
    InsufficientResolution(String),

    #[error("quadrature rectangle [{lo}, {hi}] does not cover the spectrum [{spec_lo}, {spec_hi}]")]
    RectangleMissesSpectrum {
        lo: f64,
        hi: f64,
        spec_lo: f64,
        spec_hi: f64,
    },

    #[error("grid too coarse: {given} points, need at least {required}")]
    GridTooCoarse { given: usize, required: usize },

    #[error("diffeomorphism not orientation preserving at x = {at} (κ' = {derivative})")]
    InvalidDiffeomorphism { at: f64, derivative: f64 },

    #[error("test function support violates the admissible window: {0}")]
    SupportViolation(String),

    #[error("z outside the admissible strip: |Im z| = {im} > {limit}")]
    OutsideStrip { im: f64, limit: f64 },

    #[error("action is not increasing near z = {at}")]
    NonMonotoneAction { at: f64 },

    #[error("orbit is degenerate for repetitions {0:?}")]
    DegenerateOrbit(Vec<i32>),

    #[error("fixed point is degenerate: det(dκ − I) = {det:e}")]
    DegenerateFixedPoint { det: f64 },

    #[error("oscillation unresolved: {given} points, need at least {required}")]
    UnresolvedOscillation { given: usize, required: usize },
}
