use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::jitter::{evaluate_with_seed, jittered_evaluate, JitterConfig, JitterOutcome, Perturbation};
use crate::physics::SpatialGrid;
use crate::sampler::{GramMatrix, OccupationPattern, OutputDistribution};
use crate::{seed, Error, Result};

/// Everything needed to rerun an estimate in isolation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub estimator: String,
    pub modes: usize,
    pub photons: usize,
    pub grid_half_extent: f64,
    pub grid_spacing: f64,
    pub coupling: Option<f64>,
    pub hard_shell_radius: Option<f64>,
    pub gram: Option<GramMatrix>,
    pub mean_overlap: Option<f64>,
    pub unitary_fingerprint: Option<String>,
    pub epsilon: Option<f64>,
    pub fidelity: Option<f64>,
    pub noise_seed: Option<u64>,
    pub sample_seed: Option<u64>,
    pub jitter: JitterConfig,
}

/// First-order energy correction with its normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub e1: f64,
    /// Standard error from the first-order (delta-method) expansion of the
    /// ratio estimator.
    pub stderr: f64,
    /// Accepted probability mass.
    pub i0: f64,
    /// Patterns evaluated (exact) or samples drawn (sampled).
    pub samples: usize,
    pub provenance: Provenance,
}

fn provenance<P: Perturbation + ?Sized>(
    estimator: &str,
    grid: &SpatialGrid,
    photons: usize,
    perturbation: &P,
    jitter: &JitterConfig,
    dist: Option<&OutputDistribution>,
) -> Provenance {
    let gram = dist.and_then(|d| d.meta().gram.clone());
    Provenance {
        estimator: estimator.into(),
        modes: grid.len(),
        photons,
        grid_half_extent: grid.half_extent(),
        grid_spacing: grid.spacing(),
        coupling: perturbation.coupling(),
        hard_shell_radius: perturbation.hard_shell_radius(),
        mean_overlap: gram.as_ref().map(GramMatrix::mean_overlap),
        gram,
        unitary_fingerprint: dist.and_then(|d| d.meta().unitary_fingerprint.clone()),
        epsilon: None,
        fidelity: None,
        noise_seed: None,
        sample_seed: None,
        jitter: *jitter,
    }
}

/// `E⁽¹⁾ = Σ_p P(p) v̄_p / I₀` with `I₀ = Σ_p P(p) θ̄_p`, taken exactly over the
/// enumerated collision-free distribution.
///
/// The numerator and `I₀` share the same jitter draws. The standard error
/// covers jitter randomness only and is zero with jitter disabled.
pub fn exact_e1<P: Perturbation + ?Sized>(
    dist: &OutputDistribution,
    grid: &SpatialGrid,
    perturbation: &P,
    jitter: &JitterConfig,
) -> Result<EnergyEstimate> {
    if !dist.meta().collision_free {
        return Err(Error::InvalidArgument("exact_e1 needs a collision-free postselected distribution".into()));
    }
    jitter.validate()?;
    let weighted: Vec<(f64, JitterOutcome)> = dist
        .iter()
        .filter(|(_, q)| *q > 0.0)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|(p, q)| jittered_evaluate(p, grid, perturbation, jitter).map(|o| (*q, o)))
        .collect::<Result<_>>()?;

    let (mut num, mut i0) = (0.0, 0.0);
    for (q, o) in &weighted {
        num += q * o.mean_v();
        i0 += q * o.acceptance();
    }
    if !(i0 > 0.0) {
        return Err(Error::Degenerate("no probability mass survives the hard-shell constraint (I0 = 0)".into()));
    }
    let e1 = num / i0;
    let var: f64 = weighted
        .iter()
        .map(|(q, o)| q * q * o.residual_variance(e1) / o.draws as f64)
        .sum::<f64>()
        / (i0 * i0);
    let stderr = if jitter.enabled { var.sqrt() } else { 0.0 };
    Ok(EnergyEstimate {
        e1,
        stderr,
        i0,
        samples: dist.len(),
        provenance: provenance("exact", grid, dist.meta().photons, perturbation, jitter, Some(dist)),
    })
}

/// Monte Carlo estimate `Σ_i v̄_i / Σ_i θ̄_i` over drawn patterns.
///
/// Sample `i` uses its own jitter stream. The standard error is the sample
/// standard deviation of `v̄_i − E θ̄_i`, over `√N` and the mean acceptance.
pub fn sampled_e1<P: Perturbation + ?Sized>(
    samples: &[OccupationPattern],
    grid: &SpatialGrid,
    perturbation: &P,
    jitter: &JitterConfig,
) -> Result<EnergyEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sampled_e1 needs at least one sample".into()));
    }
    jitter.validate()?;
    let per_sample: Vec<(f64, f64)> = samples
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let stream = seed::derive(jitter.seed, &[0x5A4D_504C, i as u64]);
            evaluate_with_seed(p, grid, perturbation, jitter, stream).map(|o| (o.mean_v(), o.acceptance()))
        })
        .collect::<Result<_>>()?;
    let n = per_sample.len() as f64;
    let (sum_v, sum_a) = per_sample.iter().fold((0.0, 0.0), |(v, a), &(x, y)| (v + x, a + y));
    let (mean_v, mean_a) = (sum_v / n, sum_a / n);
    if !(mean_a > 0.0) {
        return Err(Error::Degenerate("every sample was rejected by the hard-shell constraint (I0 = 0)".into()));
    }
    let e1 = mean_v / mean_a;
    let stderr = if per_sample.len() > 1 {
        let mean_z = mean_v - e1 * mean_a;
        let var_z = per_sample.iter().map(|&(v, a)| (v - e1 * a - mean_z).powi(2)).sum::<f64>() / (n - 1.0);
        (var_z / n).sqrt() / mean_a
    } else {
        0.0
    };
    let prov = provenance("sampled", grid, samples[0].total(), perturbation, jitter, None);
    Ok(EnergyEstimate { e1, stderr, i0: mean_a, samples: samples.len(), provenance: prov })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{pattern_to_configuration, efimov_potential, BoundaryRule, EfimovParams};
    use crate::sampler::DistributionMeta;

    fn meta() -> DistributionMeta {
        DistributionMeta {
            modes: 12,
            photons: 3,
            unitary_fingerprint: None,
            input: None,
            gram: None,
            collision_free: true,
            postselection_mass: 1.0,
            source: "test".into(),
        }
    }

    #[test]
    fn point_mass_without_jitter() {
        let g = SpatialGrid::uniform(12, 3.0).unwrap();
        let params = EfimovParams::new(0.4, g.spacing()).unwrap();
        let at: OccupationPattern = "100100000100".parse().unwrap();
        let support = crate::sampler::enumerate_distribution(
            &crate::linalg::UnitaryMatrix::identity(12),
            &OccupationPattern::first_modes(12, 3).unwrap(),
            &GramMatrix::indistinguishable(3),
            true,
        )
        .unwrap()
        .patterns()
        .to_vec();
        let dist = OutputDistribution::point_mass(support, &at, meta()).unwrap();
        let est = exact_e1(&dist, &g, &params, &JitterConfig::deterministic(BoundaryRule::Include)).unwrap();
        let v = efimov_potential(&pattern_to_configuration(&at, &g).unwrap(), &params).unwrap();
        assert_eq!(est.e1, v);
        assert_eq!(est.i0, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn single_sample_ratio() {
        let g = SpatialGrid::uniform(12, 3.0).unwrap();
        let params = EfimovParams::new(0.0, g.spacing()).unwrap();
        let p: OccupationPattern = "011000010000".parse().unwrap();
        let jitter = JitterConfig::jittered(300, 8);
        let est = sampled_e1(std::slice::from_ref(&p), &g, &params, &jitter).unwrap();
        let stream = seed::derive(jitter.seed, &[0x5A4D_504C, 0]);
        let o = evaluate_with_seed(&p, &g, &params, &jitter, stream).unwrap();
        assert!(o.acceptance() > 0.0);
        assert!((est.e1 - o.mean_v() / o.acceptance()).abs() < 1e-15);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn degenerate_and_empty_inputs() {
        let g = SpatialGrid::uniform(12, 3.0).unwrap();
        let params = EfimovParams::new(0.0, g.spacing()).unwrap();
        assert!(sampled_e1(&[], &g, &params, &JitterConfig::default()).is_err());
        let close: OccupationPattern = "111000000000".parse().unwrap();
        let err = sampled_e1(&[close], &g, &params, &JitterConfig::deterministic(BoundaryRule::Exclude));
        assert!(matches!(err, Err(Error::Degenerate(_))));
    }
}
