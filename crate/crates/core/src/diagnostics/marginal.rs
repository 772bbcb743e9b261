use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::sampler::{OccupationPattern, OutputDistribution};
use crate::{Error, Result};

/// k-photon detection statistics on a subset of output modes.
///
/// Entry `κ` (a k-photon occupation of the subset) is the factorial moment
/// `E[∏_j C(n_j, κ_j)]`: the probability-weighted number of ways to pick the
/// k photons described by `κ` out of a full detection event. For
/// collision-free distributions only collision-free `κ` can be nonzero and
/// the entry is the probability that all modes of `κ` fire. With `k = 1` the
/// table holds mean photon numbers; with `k = n` over all modes it is the
/// distribution itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalDistribution {
    pub k: usize,
    pub mode_subset: Vec<usize>,
    /// Events as occupations of `mode_subset` (length `mode_subset.len()`).
    pub events: Vec<OccupationPattern>,
    pub table: Vec<f64>,
    /// Only collision-free events are listed.
    pub collision_free: bool,
}

impl MarginalDistribution {
    pub fn probability(&self, event: &OccupationPattern) -> f64 {
        self.events.binary_search_by(|e| event_key(e).cmp(&event_key(event))).map_or(0.0, |i| self.table[i])
    }

    pub fn total(&self) -> f64 {
        self.table.iter().sum()
    }

    /// The `(k−1)`-marginal implied by this one. Only defined when the
    /// subset covers every mode, since photons elsewhere are otherwise
    /// unaccounted for.
    pub fn reduce(&self, photons: usize, modes: usize) -> Result<MarginalDistribution> {
        if self.k == 0 || self.k > photons {
            return Err(Error::InvalidArgument(format!("cannot reduce a {}-marginal of {photons} photons", self.k)));
        }
        if self.mode_subset != (0..modes).collect::<Vec<_>>() {
            return Err(Error::InvalidArgument("reduction needs the marginal over all modes".into()));
        }
        let k = self.k - 1;
        let events = marginal_events(self.mode_subset.len(), k, self.collision_free);
        let scale = 1.0 / (photons - k) as f64;
        let table = events
            .iter()
            .map(|kappa| {
                let mut counts = kappa.counts().to_vec();
                let mut acc = 0.0;
                for j in 0..counts.len() {
                    let c = counts[j];
                    counts[j] += 1;
                    let up = OccupationPattern::new(counts.clone()).expect("non-empty");
                    acc += (c as f64 + 1.0) * self.probability(&up);
                    counts[j] = c;
                }
                acc * scale
            })
            .collect();
        Ok(MarginalDistribution { k, mode_subset: self.mode_subset.clone(), events, table, collision_free: self.collision_free })
    }
}

fn event_key(e: &OccupationPattern) -> Vec<usize> {
    e.occupied()
}

fn marginal_events(width: usize, k: usize, collision_free: bool) -> Vec<OccupationPattern> {
    let build = |modes: Vec<usize>| {
        let mut counts = vec![0u8; width];
        for j in modes {
            counts[j] += 1;
        }
        OccupationPattern::new(counts).expect("non-empty")
    };
    if collision_free {
        (0..width).combinations(k).map(build).collect()
    } else {
        (0..width).combinations_with_replacement(k).map(build).collect()
    }
}

fn binomial(n: u8, k: u8) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// k-photon marginal of `dist` on `modes` (0-based, any order; duplicates
/// rejected).
pub fn k_marginal(dist: &OutputDistribution, modes: &[usize], k: usize) -> Result<MarginalDistribution> {
    let n = dist.meta().photons;
    let m = dist.meta().modes;
    if k > n {
        return Err(Error::InvalidArgument(format!("marginal order {k} exceeds photon number {n}")));
    }
    let mut subset = modes.to_vec();
    subset.sort_unstable();
    if subset.windows(2).any(|w| w[0] == w[1]) || subset.last().is_some_and(|&j| j >= m) {
        return Err(Error::InvalidArgument(format!("mode subset {modes:?} is not a set of modes in 0..{m}")));
    }
    if subset.is_empty() {
        return Err(Error::InvalidArgument("empty mode subset".into()));
    }
    let collision_free = dist.meta().collision_free;
    let events = marginal_events(subset.len(), k, collision_free);
    let table = events
        .iter()
        .map(|kappa| {
            dist.iter()
                .map(|(p, q)| {
                    let counts = p.counts();
                    let w: f64 = subset.iter().zip(kappa.counts()).map(|(&j, &c)| binomial(counts[j], c)).product();
                    w * q
                })
                .sum()
        })
        .collect();
    Ok(MarginalDistribution { k, mode_subset: subset, events, table, collision_free })
}
