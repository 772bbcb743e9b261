//! Boson-sampling output distributions under indistinguishable, partially
//! distinguishable and distinguishable photons, plus noisy interferometers.

mod distribution;
mod gram;
mod noise;
mod pattern;
mod probability;

pub use distribution::{collision_free_support, enumerate_distribution, full_support, sample_indices, sample_patterns, DistributionMeta, OutputDistribution};
pub use gram::GramMatrix;
pub use noise::{epsilon_for_fidelity, mean_fidelity, perturb_unitary};
pub use pattern::OccupationPattern;
pub use probability::{output_probability, output_probability_partial, submatrix, MAX_PARTIAL_PHOTONS};
