use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::physics::{BoundaryRule, EfimovParams, SpatialGrid};
use crate::sampler::OccupationPattern;
use crate::{seed, Error, Result};

/// Randomized bin evaluation settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct JitterConfig {
    pub enabled: bool,
    /// Uniform position draws per configuration.
    pub samples: usize,
    pub seed: u64,
    /// Boundary convention for deterministic (non-jittered) evaluation at
    /// bin centers.
    pub boundary_rule: BoundaryRule,
}

impl Default for JitterConfig {
    fn default() -> Self {
        JitterConfig { enabled: true, samples: 1000, seed: 0, boundary_rule: BoundaryRule::Include }
    }
}

impl JitterConfig {
    pub fn deterministic(rule: BoundaryRule) -> Self {
        JitterConfig { enabled: false, samples: 1, seed: 0, boundary_rule: rule }
    }

    pub fn jittered(samples: usize, seed: u64) -> Self {
        JitterConfig { enabled: true, samples, seed, boundary_rule: BoundaryRule::Include }
    }

    pub fn validate(&self) -> Result<()> {
        if self.enabled && self.samples == 0 {
            return Err(Error::InvalidArgument("jitter needs at least one draw per configuration".into()));
        }
        Ok(())
    }

    fn draws(&self) -> usize {
        if self.enabled {
            self.samples
        } else {
            1
        }
    }
}

/// Classically evaluated weight `h(X)`: a potential plus an acceptance
/// constraint.
pub trait Perturbation: Sync {
    fn potential(&self, x: &[f64]) -> Result<f64>;

    fn accepts(&self, x: &[f64], rule: BoundaryRule) -> bool;

    fn coupling(&self) -> Option<f64> {
        None
    }

    fn hard_shell_radius(&self) -> Option<f64> {
        None
    }
}

impl Perturbation for EfimovParams {
    fn potential(&self, x: &[f64]) -> Result<f64> {
        EfimovParams::potential(self, x)
    }

    fn accepts(&self, x: &[f64], rule: BoundaryRule) -> bool {
        EfimovParams::accepts(self, x, rule)
    }

    fn coupling(&self) -> Option<f64> {
        Some(self.c)
    }

    fn hard_shell_radius(&self) -> Option<f64> {
        Some(self.hard_shell_radius)
    }
}

/// Sufficient statistics of the draws for one configuration.
///
/// With `y_t = V(X_t) θ(X_t)` and acceptance `θ_t ∈ {0, 1}`, the sums below
/// determine every first and second moment since `y θ = y` and `θ² = θ`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct JitterOutcome {
    pub draws: usize,
    pub accepted: usize,
    pub sum_v: f64,
    pub sum_v2: f64,
}

impl JitterOutcome {
    /// Sum of accepted potential values divided by the number of draws.
    pub fn mean_v(&self) -> f64 {
        self.sum_v / self.draws as f64
    }

    pub fn acceptance(&self) -> f64 {
        self.accepted as f64 / self.draws as f64
    }

    /// Unbiased sample variance of `y − ratio·θ` across draws.
    pub(crate) fn residual_variance(&self, ratio: f64) -> f64 {
        if self.draws < 2 {
            return 0.0;
        }
        let n = self.draws as f64;
        let mean = (self.sum_v - ratio * self.accepted as f64) / n;
        let second = (self.sum_v2 - 2.0 * ratio * self.sum_v + ratio * ratio * self.accepted as f64) / n;
        (n / (n - 1.0) * (second - mean * mean)).max(0.0)
    }
}

pub(crate) fn pattern_seed(base: u64, pattern: &OccupationPattern) -> u64 {
    let path: Vec<u64> = pattern.occupied().into_iter().map(|k| k as u64).collect();
    seed::derive(base, &path)
}

/// Evaluates a collision-free pattern by drawing positions uniformly inside
/// the occupied modes' bins, or at the bin centers with jitter disabled.
///
/// The draw stream is derived from `jitter.seed` and the pattern itself, so
/// the same pattern sees the same positions in every distribution.
pub fn jittered_evaluate<P: Perturbation + ?Sized>(
    pattern: &OccupationPattern,
    grid: &SpatialGrid,
    perturbation: &P,
    jitter: &JitterConfig,
) -> Result<JitterOutcome> {
    evaluate_with_seed(pattern, grid, perturbation, jitter, pattern_seed(jitter.seed, pattern))
}

pub(crate) fn evaluate_with_seed<P: Perturbation + ?Sized>(
    pattern: &OccupationPattern,
    grid: &SpatialGrid,
    perturbation: &P,
    jitter: &JitterConfig,
    stream: u64,
) -> Result<JitterOutcome> {
    jitter.validate()?;
    if pattern.modes() != grid.len() {
        return Err(Error::Pattern(format!("pattern has {} modes, grid has {}", pattern.modes(), grid.len())));
    }
    if !pattern.is_collision_free() {
        return Err(Error::Pattern(format!("pattern {pattern} has collisions")));
    }
    let modes = pattern.occupied();
    let mut x = vec![0.0; modes.len()];
    let mut out = JitterOutcome { draws: jitter.draws(), ..Default::default() };
    let record = |x: &[f64], out: &mut JitterOutcome| -> Result<()> {
        if perturbation.accepts(x, jitter.boundary_rule) {
            let v = perturbation.potential(x)?;
            out.accepted += 1;
            out.sum_v += v;
            out.sum_v2 += v * v;
        }
        Ok(())
    };
    if !jitter.enabled {
        for (xi, &j) in x.iter_mut().zip(&modes) {
            *xi = grid.positions()[j];
        }
        record(&x, &mut out)?;
        return Ok(out);
    }
    let bins: Vec<(f64, f64)> = modes.iter().map(|&j| grid.bin(j)).collect();
    let mut rng = seed::rng(stream);
    for _ in 0..jitter.samples {
        for (xi, &(lo, hi)) in x.iter_mut().zip(&bins) {
            *xi = lo + rng.random::<f64>() * (hi - lo);
        }
        record(&x, &mut out)?;
    }
    Ok(out)
}
