//! Numerical core for semiclassical trace formulae.
//!
//! The crate is `no_std` (with `alloc`) and purely computational: linear
//! symplectic algebra and Maslov indices ([`symplectic`]), Hamiltonian flows
//! and closed-orbit search ([`dynamics`]), model spectra, band-limited test
//! functions and Weyl quantization ([`spectra`]), and the orbit-side trace
//! sums ([`trace`]). File formats, configuration and the command line live in
//! the `semitrace` crate.
//!
//! Phase-space coordinates are ordered `(x₁..xₙ, ξ₁..ξₙ)` and the symplectic
//! form is `ω(u, v) = ⟨u_x, v_ξ⟩ − ⟨u_ξ, v_x⟩ = uᵀ J v` with
//! `J = [[0, I], [−I, 0]]` everywhere in the crate. With this sign the
//! Hamilton field is `H_p = J ∇p = (∂_ξ p, −∂_x p)` and the triple index of
//! a graph, the diagonal and `{0} ⊕ ℝⁿ ⊕ ℝⁿ ⊕ {0}` is minus the signature
//! of the fixed-point Hessian of its generating phase.

#![no_std]
#![deny(rustdoc::broken_intra_doc_links)]

extern crate alloc;
#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod dynamics;
mod error;
pub mod linalg;
pub mod numerics;
pub mod spectra;
pub mod symplectic;
pub mod trace;

pub use error::Error;

/// Complex scalar used throughout.
pub type Complex = num_complex::Complex64;

/// Convenience alias for results carrying the crate-wide [`Error`].
pub type Result<T, E = Error> = core::result::Result<T, E>;
