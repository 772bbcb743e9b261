//! Boson-sampling assisted Monte Carlo integration.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: dense complex matrices, permanents (exact and randomized),
//!   nearest-unitary projection and the amplitude fidelity metric.
//! - [`sampler`]: occupation patterns, Gram-matrix distinguishability, exact
//!   output distributions, inverse-CDF sampling and noisy unitaries.
//! - [`physics`]: harmonic-oscillator orbitals, spatial grids, the encoding
//!   unitary, the Efimov three-body potential and the hard-shell constraint.
//! - [`integrator`]: the importance-sampling estimator with jittered bin
//!   evaluation, and the discretization / noise sweeps built on it.
//! - [`diagnostics`]: k-photon marginals, total variation distance,
//!   coarse-grained approximations and ingestion of measured counts.
//! - [`config`] and [`cli`]: the instance configuration file and the
//!   command-line workbench.

pub mod cli;
pub mod config;
pub mod diagnostics;
mod error;
pub mod integrator;
pub mod linalg;
pub mod physics;
pub mod sampler;
pub mod seed;

pub use error::{Error, Result};
pub use num_complex::Complex64;
