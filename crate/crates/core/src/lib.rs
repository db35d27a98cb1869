//! Spin squeezing in a two-component trapped condensate via one-axis
//! twisting, with the self-induced spatial breathing dynamics included.
//!
//! The crate has three layers:
//! * field machinery — grids ([`grid`]), complex fields and snapshots
//!   ([`field`]), spectral transforms ([`spectral`]), and the split-step
//!   integrator ([`propagator`]);
//! * physics — mean-field ground states and pulse sequences
//!   ([`meanfield`]), truncated-Wigner ensembles ([`wigner`]), spin
//!   observables ([`observables`]), the exact two-mode model
//!   ([`twomode`]), and twisting-rate estimators ([`lambda_est`]);
//! * orchestration — experiment configs ([`config`]) and end-to-end runs
//!   and sweeps ([`pipeline`]).

pub mod config;
pub mod constants;
pub mod error;
pub mod field;
pub mod grid;
pub mod lambda_est;
pub mod meanfield;
pub mod observables;
pub mod params;
pub mod pipeline;
pub mod propagator;
pub mod spectral;
pub mod twomode;
pub mod wigner;

pub use error::{Error, Result};
pub use field::{ComplexField, FieldPair};
pub use grid::{Geometry, Grid};
pub use params::{PhysicsParams, PulseSequence, PulseSpec};
