//! Linear symplectic algebra: symplectic matrices, Lagrangian frames, the
//! Hörmander–Kashiwara triple index, Maslov indices of symplectic paths and
//! the correspondence between quadratic generating phases and their
//! canonical transformations.

mod lagrangian;
mod maslov;
mod matrix;
mod path;
mod phase;
mod signature;

pub use lagrangian::{diagonal_frame, graph_lagrangian, hk_index, mixed_vertical_frame, AmbientForm, LagrangianFrame};
pub use maslov::{maslov_index_path, maslov_index_path_twice, MaslovOptions};
pub use matrix::{random_symmetric, symplectic_residual, SymplecticMatrix, DETERMINANT_TOL, SYMPLECTIC_TOL};
pub use path::{symplectic_path_from_identity, SymplecticPath};
pub use phase::{dkappa_from_phase, QuadraticPhase};
pub use signature::{signature, Signature, DEFAULT_SIGNATURE_TOL};
