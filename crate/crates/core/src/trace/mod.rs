//! Orbit sides of the trace formulae: the circle identity, Gutzwiller sums
//! over a closed orbit, scalar monodromy with Bohr–Sommerfeld roots and the
//! monodromy-trace integral, and stationary-phase traces of Fourier
//! integral operators with a direct quadrature oracle.

mod fio;
mod gutzwiller;
mod poisson;
mod scalar;

pub use fio::{fio_trace_quadrature, fio_trace_sp, FioGrid, FIXED_POINT_TOL, POINTS_PER_PERIOD};
pub use gutzwiller::{gutzwiller_sum, isolate_period, GutzwillerSum, GutzwillerTerm, DEGENERACY_TOL};
pub use poisson::{poisson_both_sides, PoissonSides};
pub use scalar::{
    bohr_sommerfeld_eigenvalues, monodromy_trace_integral, monodromy_with_derivative, scalar_monodromy, MonodromyIntegral,
    ScalarModel, ScalarMonodromy,
};
