//! Validation diagnostics: k-photon marginals, total variation distance,
//! coarse-grained approximations and measured count data.

mod coarse;
mod counts;
mod marginal;
mod tvd;

pub use coarse::{coarse_grain, BinPartition, CoarseGrained};
pub use counts::{ingest_counts, ingest_counts_file, CountData};
pub use marginal::{k_marginal, MarginalDistribution};
pub use tvd::tvd;
