//! The problem instance: harmonic-oscillator orbitals on a spatial grid,
//! the encoding unitary, and the Efimov-like three-body potential with its
//! hard-shell constraint.

mod efimov;
mod encoding;
mod grid;
mod orbital;

pub use efimov::{efimov_potential, hard_shell, BoundaryRule, EfimovParams, BOUNDARY_TOLERANCE};
pub use encoding::{encode_unitary, Encoding};
pub use grid::{pattern_to_configuration, snap_to_pattern, ParticleConfiguration, SpatialGrid};
pub use orbital::{density_mass_within, orbital, OrbitalSet};
