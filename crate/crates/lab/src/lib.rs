//! Experiment drivers for the three-wave system: configuration, scattering
//! diagnostics, threshold sweeps and the Galilean covariance test.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod data;
pub mod error;
pub mod experiments;
pub mod run;

pub use config::{RunConfig, Task};
pub use error::{LabError, LabResult};
pub use run::{run, run_file, Overrides};
