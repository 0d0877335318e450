//! Hamiltonian flows with their linearisation, closed-orbit search, actions,
//! linearised Poincaré maps and orbit Maslov indices.

mod flow;
mod hamiltonian;
mod orbit;
mod reduce;

pub use flow::{integrate_flow, FlowIntegrator, FlowOptions};
pub use hamiltonian::{Anharmonic2d, FnHamiltonian, Hamiltonian, HamiltonianSystem, Oscillator, Well1d};
pub use orbit::{find_closed_orbit, first_return, orbit_action, ClosedOrbit, FrameConvention, OrbitOptions, OrbitSample, SectionSpec};
pub use reduce::{
    check_nondegeneracy, frame_coordinates, orbit_maslov, reduce_monodromy, transversal_frame, transversal_path, turning_points,
    FramePivots, NondegeneracyCheck,
};
