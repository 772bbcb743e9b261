//! Importance-sampling estimation of the first-order energy correction.
//!
//! Each detected pattern is mapped to particle positions inside its mode
//! bins ("jittering"), the hard-shell constraint and the potential are
//! evaluated there, and the result is normalized by the accepted probability
//! mass `I₀`. [`exact_e1`] takes the expectation over an enumerated
//! distribution; [`sampled_e1`] averages over drawn samples.

mod calibrate;
mod estimate;
mod export;
mod instance;
mod jitter;
mod sweep;

pub use calibrate::{calibrate, CalibrationPoint, CalibrationReport, CalibrationTargets};
pub use estimate::{exact_e1, sampled_e1, EnergyEstimate, Provenance};
pub use export::{write_estimates_csv, write_points_csv, write_sweeps_csv};
pub use instance::Instance;
pub use jitter::{jittered_evaluate, JitterConfig, JitterOutcome, Perturbation};
pub use sweep::{
    distinguishability_sweep, fidelity_sweep, jitter_convergence_sweep, noisy_ensemble, refine_modes_sweep,
    EnsembleSummary, SweepAxis, SweepPoint, SweepResult,
};
