//! Channel estimation for dense cloud RAN with short, non-orthogonal pilots.
//!
//! The crate pairs closed-form mean-squared-error results for the oracle
//! least-squares estimator (which knows the indices of the `s` strongest
//! RRH-to-UE channels) with a Monte Carlo engine that simulates RRH
//! deployments, fading channels, Gaussian pilots and noise, and then runs
//! oracle LS, Basis Pursuit or OMP on the received training signal.
//!
//! Module map:
//!
//! - [`geometry`]: RRH deployments (finite uniform window and homogeneous PPP).
//! - [`channel`]: fading models, channel synthesis, support selection.
//! - [`signal`]: Gaussian pilot matrices and the received training signal.
//! - [`estimators`]: oracle LS, Basis Pursuit (complex ADMM) and OMP.
//! - [`analytics`]: closed-form MSE expressions and the distribution of the
//!   `s`-th strongest received power.
//! - [`harness`]: seeded, parallel Monte Carlo experiments and sweeps.
//! - [`report`]: CSV serialization of sweep rows.

pub mod analytics;
pub mod channel;
pub mod error;
pub mod estimators;
pub mod geometry;
pub mod harness;
pub mod report;
pub mod rng;
pub mod signal;
mod stats;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Pilot overhead reduction in percent relative to orthogonal training,
/// which needs one pilot symbol per RRH.
pub fn overhead_reduction_percent(n_pilots: usize, n_rrh: usize) -> f64 {
    100.0 * (1.0 - n_pilots as f64 / n_rrh as f64)
}
