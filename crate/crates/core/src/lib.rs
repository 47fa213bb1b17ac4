//! Memory-driven binary random walk.
//!
//! A walker takes `±1` steps whose bias depends on its current displacement
//! through a coupling `ε(x)`. This crate propagates the resulting
//! distribution exactly ([`lattice`]), checks it against the closed-form
//! generating function and cumulant formulas ([`closed_form`]), simulates
//! trajectories ([`sampler`]) and fits the regime-switching variant to
//! return data ([`fitlab`]).

pub mod closed_form;
pub mod error;
pub mod fitlab;
pub mod lattice;
mod numeric;
pub mod rng;
pub mod sampler;

pub use error::{Error, Result};
pub use lattice::{
    evolve, evolve_with, moments, ClampPolicy, CouplingProfile, LatticePdf, MomentReport,
    ValidityReport,
};
pub use numeric::{compensated_sum, mean_and_se, pairwise_sum};
