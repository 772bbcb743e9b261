use std::io::{Read, Write};

use itertools::Itertools;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::probability::{output_probability, output_probability_partial};
use super::{GramMatrix, OccupationPattern};
use crate::linalg::UnitaryMatrix;
use crate::{seed, Error, Result};

/// Tolerance on `Σ p = 1`.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-10;

/// Where a distribution came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionMeta {
    pub modes: usize,
    pub photons: usize,
    pub unitary_fingerprint: Option<String>,
    pub input: Option<OccupationPattern>,
    pub gram: Option<GramMatrix>,
    pub collision_free: bool,
    /// Probability mass of the stored support before renormalization (the
    /// collision-free fraction for postselected distributions).
    pub postselection_mass: f64,
    pub source: String,
}

/// Normalized probabilities over an ordered list of output patterns.
///
/// Patterns are ordered lexicographically by their occupied modes, so
/// `111000000000` precedes `110100000000`.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputDistribution {
    patterns: Vec<OccupationPattern>,
    probs: Vec<f64>,
    meta: DistributionMeta,
    unitary: Option<UnitaryMatrix>,
}

#[derive(Serialize, Deserialize)]
struct DistributionFile {
    meta: DistributionMeta,
    entries: Vec<Entry>,
}

#[derive(Serialize, Deserialize)]
struct Entry {
    pattern: OccupationPattern,
    probability: f64,
}

/// Collision-free `n`-photon patterns over `m` modes, canonical order.
pub fn collision_free_support(m: usize, n: usize) -> Vec<OccupationPattern> {
    (0..m)
        .combinations(n)
        .map(|modes| OccupationPattern::from_modes(m, &modes).expect("modes in range"))
        .collect()
}

/// All `n`-photon patterns over `m` modes, canonical order.
pub fn full_support(m: usize, n: usize) -> Vec<OccupationPattern> {
    (0..m)
        .combinations_with_replacement(n)
        .map(|modes| OccupationPattern::from_modes(m, &modes).expect("modes in range"))
        .collect()
}

impl OutputDistribution {
    /// Validates non-negativity, normalization, a common mode/photon count
    /// and canonical ordering.
    pub fn new(patterns: Vec<OccupationPattern>, probs: Vec<f64>, meta: DistributionMeta) -> Result<Self> {
        if patterns.is_empty() || patterns.len() != probs.len() {
            return Err(Error::Data(format!("{} patterns but {} probabilities", patterns.len(), probs.len())));
        }
        for p in &patterns {
            if p.modes() != meta.modes || p.total() != meta.photons {
                return Err(Error::Pattern(format!(
                    "pattern {p} does not have {} photons in {} modes",
                    meta.photons, meta.modes
                )));
            }
            if meta.collision_free && !p.is_collision_free() {
                return Err(Error::Pattern(format!("pattern {p} has collisions")));
            }
        }
        let keys: Vec<Vec<usize>> = patterns.iter().map(OccupationPattern::occupied).collect();
        if keys.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Data("patterns are not in canonical order or contain duplicates".into()));
        }
        if let Some(&bad) = probs.iter().find(|&&q| !q.is_finite() || q < 0.0) {
            return Err(Error::Data(format!("invalid probability {bad}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(Error::Data(format!("probabilities sum to {total}")));
        }
        Ok(OutputDistribution { patterns, probs, meta, unitary: None })
    }

    /// Point mass on one pattern within the given support.
    pub fn point_mass(support: Vec<OccupationPattern>, at: &OccupationPattern, meta: DistributionMeta) -> Result<Self> {
        let probs = support.iter().map(|p| if p == at { 1.0 } else { 0.0 }).collect();
        Self::new(support, probs, meta)
    }

    pub(crate) fn with_unitary(mut self, u: UnitaryMatrix) -> Self {
        self.unitary = Some(u);
        self
    }

    pub fn patterns(&self) -> &[OccupationPattern] {
        &self.patterns
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn meta(&self) -> &DistributionMeta {
        &self.meta
    }

    /// The interferometer that generated this distribution, when known.
    pub fn unitary(&self) -> Option<&UnitaryMatrix> {
        self.unitary.as_ref()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&OccupationPattern, f64)> {
        self.patterns.iter().zip(self.probs.iter().copied())
    }

    /// Index of a pattern in the stored ordering.
    pub fn position(&self, pattern: &OccupationPattern) -> Option<usize> {
        let key = pattern.occupied();
        self.patterns.binary_search_by(|p| p.occupied().cmp(&key)).ok()
    }

    pub fn probability(&self, pattern: &OccupationPattern) -> f64 {
        self.position(pattern).map_or(0.0, |k| self.probs[k])
    }

    /// Same support and meta, new probabilities.
    pub fn with_probs(&self, probs: Vec<f64>, source: &str) -> Result<Self> {
        let mut meta = self.meta.clone();
        meta.source = source.to_string();
        Self::new(self.patterns.clone(), probs, meta)
    }

    /// Restrict to collision-free patterns and renormalize, recording the kept
    /// mass.
    pub fn postselect_collision_free(&self) -> Result<Self> {
        let (patterns, probs): (Vec<_>, Vec<_>) =
            self.iter().filter(|(p, _)| p.is_collision_free()).map(|(p, q)| (p.clone(), q)).unzip();
        let mass: f64 = probs.iter().sum();
        if !(mass > 0.0) {
            return Err(Error::Degenerate("no collision-free probability mass".into()));
        }
        let mut meta = self.meta.clone();
        meta.collision_free = true;
        meta.postselection_mass = mass * self.meta.postselection_mass;
        let out = Self::new(patterns, probs.iter().map(|q| q / mass).collect(), meta)?;
        Ok(match &self.unitary {
            Some(u) => out.with_unitary(u.clone()),
            None => out,
        })
    }

    /// CSV with header `pattern,probability`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["pattern", "probability"])?;
        for (p, q) in self.iter() {
            w.write_record([p.to_string(), q.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        let file = DistributionFile {
            meta: self.meta.clone(),
            entries: self.iter().map(|(p, q)| Entry { pattern: p.clone(), probability: q }).collect(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json<R: Read>(reader: R) -> Result<Self> {
        let file: DistributionFile = serde_json::from_reader(reader)?;
        let (patterns, probs) = file.entries.into_iter().map(|e| (e.pattern, e.probability)).unzip();
        Self::new(patterns, probs, file.meta)
    }
}

/// Exact output distribution for input `mu_in` through `u` with photon
/// overlaps `gram`.
///
/// With `collision_free` only the `C(m, n)` collision-free patterns are
/// evaluated and renormalized; the discarded mass is recorded in the meta
/// block. Otherwise all `C(m+n−1, n)` patterns are listed.
pub fn enumerate_distribution(
    u: &UnitaryMatrix,
    mu_in: &OccupationPattern,
    gram: &GramMatrix,
    collision_free: bool,
) -> Result<OutputDistribution> {
    let m = u.dim();
    let n = mu_in.total();
    if mu_in.modes() != m {
        return Err(Error::Pattern(format!("input pattern has {} modes, unitary has {m}", mu_in.modes())));
    }
    if gram.dim() != n {
        return Err(Error::Model(format!("Gram matrix dimension {} for {n} photons", gram.dim())));
    }
    let support = if collision_free { collision_free_support(m, n) } else { full_support(m, n) };
    let indistinguishable = gram.is_indistinguishable();
    let raw: Vec<f64> = support
        .par_iter()
        .map(|out| {
            if indistinguishable {
                output_probability(u, mu_in, out)
            } else {
                output_probability_partial(u, mu_in, out, gram)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    // The Gram-weighted sum can land a few ulps below zero.
    let raw: Vec<f64> = raw.into_iter().map(|q| q.max(0.0)).collect();
    let mass: f64 = raw.iter().sum();
    if !(mass > 0.0) {
        return Err(Error::Degenerate("output distribution has no mass on the requested support".into()));
    }
    let probs = if collision_free { raw.iter().map(|q| q / mass).collect() } else { raw };
    let meta = DistributionMeta {
        modes: m,
        photons: n,
        unitary_fingerprint: Some(u.fingerprint()),
        input: Some(mu_in.clone()),
        gram: Some(gram.clone()),
        collision_free,
        postselection_mass: mass,
        source: "exact".into(),
    };
    Ok(OutputDistribution::new(support, probs, meta)?.with_unitary(u.clone()))
}

/// `count` i.i.d. draws (as pattern indices) by inverse CDF over the stored
/// ordering.
pub fn sample_indices(dist: &OutputDistribution, count: usize, seed: u64) -> Vec<usize> {
    if count == 0 {
        return Vec::new();
    }
    let mut cdf = Vec::with_capacity(dist.len());
    let mut acc = 0.0;
    for &q in dist.probs() {
        acc += q;
        cdf.push(acc);
    }
    let total = acc;
    let last_positive = dist.probs().iter().rposition(|&q| q > 0.0).unwrap_or(0);
    let mut rng = seed::rng(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * total;
            cdf.partition_point(|&c| c <= u).min(last_positive)
        })
        .collect()
}

pub fn sample_patterns(dist: &OutputDistribution, count: usize, seed: u64) -> Vec<OccupationPattern> {
    sample_indices(dist, count, seed).into_iter().map(|k| dist.patterns()[k].clone()).collect()
}
