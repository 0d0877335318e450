//! Experiment runner for the `semitrace-core` trace formulae.
//!
//! An [`ExperimentConfig`] names one experiment, its model parameters and a
//! list of `h` values. [`run_experiment`] evaluates both sides of the
//! identity at each `h`, fits a convergence slope when there are at least
//! three, and returns a [`TraceReport`] that [`emit_report`] writes as JSON,
//! CSV or plot data.

pub mod config;
mod error;
pub mod report;
mod run;

pub use config::{Experiment, ExperimentConfig, Format};
pub use error::{HarnessError, Result};
pub use report::{emit_report, Row, Slope, SlopeVerdict, TraceReport};
pub use run::{budget_warnings, convergence_study, estimate_seconds, run_experiment, run_experiment_with, Execution};
