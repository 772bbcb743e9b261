use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EnergyEstimate, Instance, JitterConfig, Provenance};
use crate::linalg::UnitaryMatrix;
use crate::physics::BoundaryRule;
use crate::sampler::{perturb_unitary, GramMatrix};
use crate::{seed, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    /// Number of modes `m`.
    Modes,
    /// Jitter draws per configuration.
    Jitter,
    /// Homogeneous pairwise overlap `s`.
    Overlap,
    /// Mean amplitude fidelity `F_U`.
    Fidelity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub abscissa: f64,
    /// Ensemble mean for repeated runs, the single estimate otherwise.
    pub e1: f64,
    /// Error of `e1`: the estimator's own standard error for single runs,
    /// ensemble stddev / √runs for ensembles.
    pub stderr: f64,
    /// Stddev of `e1` across the ensemble (0 for single runs).
    pub ensemble_std: f64,
    pub i0: f64,
    pub runs: usize,
    pub provenance: Provenance,
}

/// One curve: points with strictly monotone abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub series: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn new(axis: SweepAxis, series: impl Into<String>, points: Vec<SweepPoint>) -> Result<Self> {
        let xs: Vec<f64> = points.iter().map(|p| p.abscissa).collect();
        let increasing = xs.windows(2).all(|w| w[0] < w[1]);
        let decreasing = xs.windows(2).all(|w| w[0] > w[1]);
        if !(increasing || decreasing) {
            return Err(Error::InvalidArgument(format!("sweep abscissae are not strictly monotone: {xs:?}")));
        }
        Ok(SweepResult { axis, series: series.into(), points })
    }

    pub fn e1(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.e1).collect()
    }
}

impl SweepPoint {
    fn single(abscissa: f64, est: EnergyEstimate) -> Self {
        SweepPoint {
            abscissa,
            e1: est.e1,
            stderr: est.stderr,
            ensemble_std: 0.0,
            i0: est.i0,
            runs: 1,
            provenance: est.provenance,
        }
    }
}

/// Mean and spread of an ensemble of estimates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub mean_e1: f64,
    pub std_e1: f64,
    pub mean_i0: f64,
    pub mean_fidelity: f64,
    pub std_fidelity: f64,
    pub runs: usize,
    pub estimates: Vec<EnergyEstimate>,
}

impl EnsembleSummary {
    pub fn from_estimates(estimates: Vec<EnergyEstimate>) -> Self {
        let runs = estimates.len();
        let (mean_e1, std_e1) = mean_std(estimates.iter().map(|e| e.e1));
        let (mean_i0, _) = mean_std(estimates.iter().map(|e| e.i0));
        let (mean_fidelity, std_fidelity) = mean_std(estimates.iter().map(|e| e.provenance.fidelity.unwrap_or(1.0)));
        EnsembleSummary { mean_e1, std_e1, mean_i0, mean_fidelity, std_fidelity, runs, estimates }
    }

    /// Standard error of the ensemble mean.
    pub fn stderr(&self) -> f64 {
        if self.runs == 0 {
            0.0
        } else {
            self.std_e1 / (self.runs as f64).sqrt()
        }
    }

    fn point(&self, abscissa: f64) -> SweepPoint {
        let mut provenance = self.estimates[0].provenance.clone();
        provenance.fidelity = Some(self.mean_fidelity);
        SweepPoint {
            abscissa,
            e1: self.mean_e1,
            stderr: self.stderr(),
            ensemble_std: self.std_e1,
            i0: self.mean_i0,
            runs: self.runs,
            provenance,
        }
    }
}

fn mean_std(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, 0.0);
    }
    // Shifted by the first value so identical inputs give an exact mean.
    let mean = v[0] + v.iter().map(|x| x - v[0]).sum::<f64>() / n;
    let std = if v.len() > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    (mean, std)
}

/// Exact `E⁽¹⁾` along the nested refinement sequence under the deterministic
/// include and exclude boundary conventions and with jitter. Returns the
/// three curves in that order.
pub fn refine_modes_sweep(modes: &[usize], instance: &Instance) -> Result<Vec<SweepResult>> {
    if modes.first() != Some(&instance.base_grid.len()) {
        return Err(Error::InvalidArgument(format!("mode list must start at the base grid size {}", instance.base_grid.len())));
    }
    let conventions = [
        ("include", JitterConfig::deterministic(BoundaryRule::Include)),
        ("exclude", JitterConfig::deterministic(BoundaryRule::Exclude)),
        ("jitter", JitterConfig { enabled: true, ..instance.jitter }),
    ];
    let per_m: Vec<Vec<SweepPoint>> = modes
        .par_iter()
        .map(|&m| {
            let grid = instance.refined_grid(m)?;
            let enc = instance.encode(&grid)?;
            let dist = instance.distribution(&enc.unitary, &instance.gram)?;
            conventions
                .iter()
                .map(|(_, jitter)| Ok(SweepPoint::single(m as f64, instance.estimate(&dist, &grid, jitter)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    conventions
        .iter()
        .enumerate()
        .map(|(k, (name, _))| SweepResult::new(SweepAxis::Modes, *name, per_m.iter().map(|row| row[k].clone()).collect()))
        .collect()
}

/// Ensemble mean and stddev of jittered `E⁽¹⁾` over `repeats` jitter seeds,
/// one curve over `modes` per jitter size in `draws`.
pub fn jitter_convergence_sweep(
    modes: &[usize],
    draws: &[usize],
    repeats: usize,
    instance: &Instance,
) -> Result<Vec<SweepResult>> {
    if repeats == 0 || draws.is_empty() {
        return Err(Error::InvalidArgument("need at least one repeat and one jitter size".into()));
    }
    let dists = modes
        .par_iter()
        .map(|&m| {
            let grid = instance.refined_grid(m)?;
            let enc = instance.encode(&grid)?;
            Ok((grid, instance.distribution(&enc.unitary, &instance.gram)?))
        })
        .collect::<Result<Vec<_>>>()?;
    draws
        .iter()
        .map(|&n| {
            let points = dists
                .iter()
                .zip(modes)
                .map(|((grid, dist), &m)| {
                    let estimates = (0..repeats)
                        .into_par_iter()
                        .map(|r| {
                            let jitter = JitterConfig::jittered(n, seed::derive(instance.jitter.seed, &[r as u64]));
                            instance.estimate(dist, grid, &jitter)
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(EnsembleSummary::from_estimates(estimates).point(m as f64))
                })
                .collect::<Result<Vec<_>>>()?;
            SweepResult::new(SweepAxis::Modes, format!("N={n}"), points)
        })
        .collect()
}

/// `E⁽¹⁾` on the base grid with ideal unitary for homogeneous overlaps `s`.
pub fn distinguishability_sweep(overlaps: &[f64], instance: &Instance) -> Result<SweepResult> {
    if let Some(s) = overlaps.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(Error::InvalidArgument(format!("overlap {s} outside [0, 1]")));
    }
    let grid = &instance.base_grid;
    let enc = instance.encode(grid)?;
    let points = overlaps
        .par_iter()
        .map(|&s| {
            let gram = GramMatrix::homogeneous(instance.photons(), s)?;
            let dist = instance.distribution(&enc.unitary, &gram)?;
            Ok(SweepPoint::single(s, instance.estimate(&dist, grid, &instance.jitter)?))
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::new(SweepAxis::Overlap, "homogeneous", points)
}

/// `E⁽¹⁾` over `realizations` noisy copies of `u` at strength `epsilon`.
/// Realization `r` uses noise seed `derive(instance.noise_seed, [r])`.
pub fn noisy_ensemble(
    instance: &Instance,
    u: &UnitaryMatrix,
    gram: &GramMatrix,
    epsilon: f64,
    realizations: usize,
) -> Result<EnsembleSummary> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("need at least one noise realization".into()));
    }
    let grid = &instance.base_grid;
    let estimates = (0..realizations)
        .into_par_iter()
        .map(|r| {
            let noise_seed = seed::derive(instance.noise_seed, &[r as u64]);
            let (noisy, fidelity) = perturb_unitary(u, epsilon, noise_seed)?;
            let dist = instance.distribution(&noisy, gram)?;
            let mut est = instance.estimate(&dist, grid, &instance.jitter)?;
            est.provenance.epsilon = Some(epsilon);
            est.provenance.fidelity = Some(fidelity);
            est.provenance.noise_seed = Some(noise_seed);
            Ok(est)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnsembleSummary::from_estimates(estimates))
}

/// Ensemble `E⁽¹⁾` against mean fidelity for each noise strength, with
/// indistinguishable photons. `epsilons` must be strictly increasing.
pub fn fidelity_sweep(epsilons: &[f64], realizations: usize, instance: &Instance) -> Result<SweepResult> {
    if epsilons.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument("noise strengths must be strictly increasing".into()));
    }
    let enc = instance.encode(&instance.base_grid)?;
    let gram = GramMatrix::indistinguishable(instance.photons());
    let points = epsilons
        .iter()
        .map(|&eps| {
            let summary = noisy_ensemble(instance, &enc.unitary, &gram, eps, realizations)?;
            let mut point = summary.point(summary.mean_fidelity);
            point.provenance.epsilon = Some(eps);
            point.provenance.noise_seed = Some(instance.noise_seed);
            Ok(point)
        })
        .collect::<Result<Vec<_>>>()?;
    SweepResult::new(SweepAxis::Fidelity, "s=1", points)
}
