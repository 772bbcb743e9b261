use serde::{Deserialize, Serialize};

use super::{exact_e1, JitterConfig};
use crate::physics::{encode_unitary, EfimovParams, OrbitalSet, SpatialGrid};
use crate::sampler::{enumerate_distribution, GramMatrix, OccupationPattern};
use crate::{Error, Result};

/// Search settings. Values are the target energies of the fine-grid
/// reference and of the base grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTargets {
    pub reference: f64,
    pub base: f64,
    /// Allowed relative deviation of either energy.
    pub tolerance: f64,
    /// Upper bound on `|base / reference − 1|`.
    pub max_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub half_extent: f64,
    pub hard_shell_radius: f64,
    /// Coupling that puts the base-grid energy on its target (clamped at 0).
    pub coupling: f64,
    pub base_e1: f64,
    pub base_stderr: f64,
    pub reference_e1: f64,
    pub reference_stderr: f64,
    pub base_error: f64,
    pub reference_error: f64,
    /// `base_e1 / reference_e1 − 1`, independent of the coupling.
    pub gap: f64,
    pub passes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub targets: CalibrationTargets,
    pub modes: usize,
    pub reference_modes: usize,
    pub points: Vec<CalibrationPoint>,
    /// Passing point with the gap closest to the target gap, or the point
    /// with the smallest worst-case error when none passes.
    pub best: CalibrationPoint,
}

/// Scans the grid half-extent; at each extent the coupling `C` is solved in
/// closed form from the base-grid energy, which is proportional to `C + ¼`.
///
/// The reference grid splits every base bin into `subdivisions` parts.
/// `hard_shell_radius` defaults to the base spacing at each extent. The base
/// grid has few patterns, so it can afford more jitter draws than the
/// reference; its jitter noise otherwise dominates the gap.
#[allow(clippy::too_many_arguments)]
pub fn calibrate(
    orbitals: &OrbitalSet,
    modes: usize,
    extents: &[f64],
    hard_shell_radius: Option<f64>,
    subdivisions: usize,
    base_jitter: &JitterConfig,
    reference_jitter: &JitterConfig,
    targets: &CalibrationTargets,
) -> Result<CalibrationReport> {
    if extents.is_empty() {
        return Err(Error::InvalidArgument("calibration needs at least one grid extent".into()));
    }
    if !(targets.reference < 0.0 && targets.base < 0.0) {
        return Err(Error::InvalidArgument("calibration targets must be negative energies".into()));
    }
    if subdivisions < 2 {
        return Err(Error::InvalidArgument("reference grid needs at least two sub-bins per bin".into()));
    }
    let n = orbitals.len();
    let gram = GramMatrix::indistinguishable(n);
    let target_gap = targets.base / targets.reference - 1.0;
    let points = extents
        .iter()
        .map(|&a| {
            let grid = SpatialGrid::uniform(modes, a)?;
            let d_hs = hard_shell_radius.unwrap_or(grid.spacing());
            let unit = EfimovParams::new(0.0, d_hs)?;
            let energy = |g: &SpatialGrid, jitter: &JitterConfig| -> Result<_> {
                let enc = encode_unitary(orbitals, g)?;
                let input = OccupationPattern::first_modes(g.len(), n)?;
                let dist = enumerate_distribution(&enc.unitary, &input, &gram, true)?;
                exact_e1(&dist, g, &unit, jitter)
            };
            let base = energy(&grid, base_jitter)?;
            let reference = energy(&grid.subdivide(subdivisions), reference_jitter)?;
            let coupling = (0.25 * targets.base / base.e1 - 0.25).max(0.0);
            let scale = (coupling + 0.25) / 0.25;
            let base_e1 = scale * base.e1;
            let reference_e1 = scale * reference.e1;
            let base_error = (base_e1 / targets.base - 1.0).abs();
            let reference_error = (reference_e1 / targets.reference - 1.0).abs();
            let gap = base.e1 / reference.e1 - 1.0;
            let passes = base_error <= targets.tolerance
                && reference_error <= targets.tolerance
                && gap.signum() == target_gap.signum()
                && gap.abs() < targets.max_gap;
            Ok(CalibrationPoint {
                half_extent: a,
                hard_shell_radius: d_hs,
                coupling,
                base_e1,
                base_stderr: scale * base.stderr,
                reference_e1,
                reference_stderr: scale * reference.stderr,
                base_error,
                reference_error,
                gap,
                passes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let key = |p: &CalibrationPoint| {
        if p.passes {
            (0, (p.gap - target_gap).abs())
        } else {
            (1, p.base_error.max(p.reference_error))
        }
    };
    let best = points
        .iter()
        .min_by(|x, y| {
            let (kx, ky) = (key(x), key(y));
            kx.0.cmp(&ky.0).then(kx.1.total_cmp(&ky.1))
        })
        .expect("non-empty")
        .clone();
    Ok(CalibrationReport {
        targets: targets.clone(),
        modes,
        reference_modes: modes * subdivisions,
        points,
        best,
    })
}
