//! Model quantum spectra, band-limited test functions and smoothed traces,
//! functional calculus through almost-analytic extensions, and grid Weyl
//! quantization.
//!
//! Fourier convention: `f̂(t) = ∫ f(λ) e^{−iλt} dλ` and
//! `f(λ) = (1/2π) ∫ f̂(t) e^{iλt} dt`, so that `Σₙ f(n) = Σₘ f̂(2πm)`.

mod calculus;
mod models;
mod test_function;
mod weyl;
mod window;

pub use calculus::{almost_analytic_extension, hs_functional_calculus, resolvent_norm, AlmostAnalytic, HsOptions, SampledFunction};
pub use models::{model_spectrum, spectral_trace, Domain, ModelKind, SpectralModel, SpectralTrace, Spectrum};
pub use test_function::{BumpPiece, TestFunction};
pub use weyl::{weyl_invariance_residual, weyl_quantize, Diffeo1d, Grid1d, Symbol, WeylOptions};
pub use window::EnergyWindow;

pub(crate) use models::{turning_points, well_minimum};
