//! Dense complex linear algebra: permanents, nearest-unitary projection and
//! the amplitude fidelity metric.

mod gurvits;
mod matrix;
mod permanent;
mod unitary;

pub use gurvits::{gurvits_estimate, GurvitsEstimate};
pub use matrix::ComplexMatrix;
pub use permanent::{permanent, permanent_with, PermanentMethod, MAX_PERMANENT_DIM};
pub use unitary::{amplitude_fidelity, haar_random, nearest_unitary, UnitaryMatrix, UNITARITY_TOLERANCE};
