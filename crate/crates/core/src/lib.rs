//! Numerics for the three-wave quadratic Schrödinger system
//!
//! ```text
//! i u1_t + k1 Δu1 = -conj(u2) u3
//! i u2_t + k2 Δu2 = -conj(u1) u3
//! i u3_t + k3 Δu3 = -u1 u2
//! ```
//!
//! The crate provides grids and spectral/radial operators, the conserved and
//! variational functionals, a Petviashvili ground-state solver, a Strang
//! split-step propagator, and the interaction Morawetz diagnostics.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix double precision, which is what the experiments use.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod banded;
pub mod error;
pub mod fft;
pub mod field;
pub mod functionals;
pub mod grid;
pub mod groundstate;
pub mod morawetz;
pub mod ops;
pub mod params;
pub mod propagator;
pub mod scalar;
pub mod snapshot;

pub use error::{Error, Result};
pub use field::{Field, FieldTriple};
pub use grid::{Grid, GridKind};
pub use params::SystemParams;
pub use scalar::Real;
pub use snapshot::{read_snapshot, write_snapshot, Snapshot};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type FieldTriple64 = FieldTriple<f64>;
pub type FieldTriple32 = FieldTriple<f32>;
pub type SystemParams64 = SystemParams<f64>;
pub type Snapshot64 = Snapshot<f64>;
pub type GroundState64 = groundstate::GroundStateResult<f64>;
pub type Trajectory64 = propagator::Trajectory<f64>;
