use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tvd;
use crate::linalg::gurvits_estimate;
use crate::sampler::{submatrix, OutputDistribution};
use crate::{seed, Error, Result};

/// Disjoint, exhaustive assignment of pattern indices to `k` non-empty bins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinPartition {
    k: usize,
    assignment: Vec<usize>,
}

impl BinPartition {
    pub fn new(k: usize, assignment: Vec<usize>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("partition needs at least one bin".into()));
        }
        let mut seen = vec![false; k];
        for &b in &assignment {
            *seen
                .get_mut(b)
                .ok_or_else(|| Error::InvalidArgument(format!("bin index {b} out of range for {k} bins")))? = true;
        }
        if let Some(b) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidArgument(format!("bin {b} is empty")));
        }
        Ok(BinPartition { k, assignment })
    }

    /// Every pattern in its own bin.
    pub fn singletons(len: usize) -> Result<Self> {
        Self::new(len, (0..len).collect())
    }

    pub fn single_bin(len: usize) -> Result<Self> {
        Self::new(1, vec![0; len])
    }

    /// Uniformly random assignment conditioned on no bin being empty.
    pub fn random(len: usize, k: usize, seed: u64) -> Result<Self> {
        if k == 0 || k > len {
            return Err(Error::InvalidArgument(format!("cannot split {len} patterns into {k} non-empty bins")));
        }
        let mut rng = seed::rng(seed);
        let mut order: Vec<usize> = (0..len).collect();
        order.shuffle(&mut rng);
        let mut assignment = vec![0; len];
        for (slot, &i) in order.iter().enumerate() {
            assignment[i] = if slot < k { slot } else { rng.random_range(0..k) };
        }
        Self::new(k, assignment)
    }

    pub fn bins(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &b in &self.assignment {
            sizes[b] += 1;
        }
        sizes
    }

    /// `G_k = Σ_{X ∈ B_k} g(X)`.
    pub fn masses(&self, probs: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.k];
        for (&b, &p) in self.assignment.iter().zip(probs) {
            g[b] += p;
        }
        g
    }

    /// Largest within-bin spread `max g − min g`.
    pub fn flatness(&self, probs: &[f64]) -> f64 {
        let mut lo = vec![f64::INFINITY; self.k];
        let mut hi = vec![f64::NEG_INFINITY; self.k];
        for (&b, &p) in self.assignment.iter().zip(probs) {
            lo[b] = lo[b].min(p);
            hi[b] = hi[b].max(p);
        }
        lo.iter().zip(&hi).map(|(l, h)| h - l).fold(0.0, f64::max)
    }
}

/// Result of flattening a distribution over a partition.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrained {
    /// Exact bin masses spread uniformly over each bin.
    pub approx: OutputDistribution,
    /// Same with the randomized mass estimates.
    pub approx_estimated: OutputDistribution,
    pub exact_masses: Vec<f64>,
    pub estimated_masses: Vec<f64>,
    /// `|G_k − Ĝ_k|` per bin.
    pub delta: Vec<f64>,
    /// Largest within-bin spread ε.
    pub flatness: f64,
    /// `Σ_k (ε |B_k| + δ_k)`.
    pub tvd_bound: f64,
    /// `TVD(g, approx)`.
    pub tvd_actual: f64,
    /// `TVD(g, approx_estimated)`.
    pub tvd_estimated: f64,
}

/// Replaces `dist` by its bin masses spread uniformly within each bin.
///
/// Randomized bin masses are estimated pattern by pattern: `|Perm M|²` is taken as
/// `Re(a · conj(b))` for two independent randomized permanent estimates
/// `a`, `b` (unbiased for the squared modulus), divided by the distribution's
/// postselection mass and renormalized over bins. The exact masses come from
/// summation. Requires indistinguishable photons and the distribution's
/// unitary.
pub fn coarse_grain(
    dist: &OutputDistribution,
    partition: &BinPartition,
    gurvits_samples: usize,
    seed: u64,
) -> Result<CoarseGrained> {
    if partition.len() != dist.len() {
        return Err(Error::InvalidArgument(format!(
            "partition covers {} patterns, distribution has {}",
            partition.len(),
            dist.len()
        )));
    }
    let u = dist
        .unitary()
        .ok_or_else(|| Error::Model("coarse graining needs the distribution's unitary".into()))?;
    let meta = dist.meta();
    let input = meta.input.as_ref().ok_or_else(|| Error::Model("distribution has no input pattern".into()))?;
    if meta.gram.as_ref().is_some_and(|g| !g.is_indistinguishable()) {
        return Err(Error::Model("randomized bin masses assume indistinguishable photons".into()));
    }
    let weights: Vec<f64> = dist
        .patterns()
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let m = submatrix(u, input, p)?;
            let a = gurvits_estimate(&m, gurvits_samples, seed::derive(seed, &[i as u64, 0]))?;
            let b = gurvits_estimate(&m, gurvits_samples, seed::derive(seed, &[i as u64, 1]))?;
            let norm = p.factorial_product() * input.factorial_product() * meta.postselection_mass;
            Ok((a.estimate * b.estimate.conj()).re / norm)
        })
        .collect::<Result<_>>()?;

    let exact_masses = partition.masses(dist.probs());
    let raw = partition.masses(&weights);
    let clipped: Vec<f64> = raw.iter().map(|g| g.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Degenerate("estimated bin masses vanish".into()));
    }
    let estimated_masses: Vec<f64> = clipped.iter().map(|g| g / total).collect();
    let delta: Vec<f64> = exact_masses.iter().zip(&estimated_masses).map(|(g, h)| (g - h).abs()).collect();

    let sizes = partition.sizes();
    let spread = |masses: &[f64]| -> Vec<f64> {
        partition.assignment().iter().map(|&b| masses[b] / sizes[b] as f64).collect()
    };
    let approx = dist.with_probs(spread(&exact_masses), "coarse-grained")?;
    let approx_estimated = dist.with_probs(spread(&estimated_masses), "coarse-grained-estimated")?;
    let flatness = partition.flatness(dist.probs());
    let tvd_bound = sizes.iter().zip(&delta).map(|(&s, d)| flatness * s as f64 + d).sum();
    let tvd_actual = tvd(dist, &approx)?;
    let tvd_estimated = tvd(dist, &approx_estimated)?;
    Ok(CoarseGrained {
        approx,
        approx_estimated,
        exact_masses,
        estimated_masses,
        delta,
        flatness,
        tvd_bound,
        tvd_actual,
        tvd_estimated,
    })
}
