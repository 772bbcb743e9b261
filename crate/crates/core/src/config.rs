//! Problem-instance configuration, read from and written to TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::integrator::{CalibrationTargets, Instance, JitterConfig};
use crate::physics::{BoundaryRule, EfimovParams, OrbitalSet, SpatialGrid};
use crate::sampler::GramMatrix;
use crate::{seed, Error, Result};

/// Photon overlaps: one shared value, an explicit matrix, or pairwise HOM
/// visibilities (`s = √V`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum GramSpec {
    Homogeneous { s: f64 },
    Matrix { rows: Vec<Vec<f64>> },
    Visibilities { values: Vec<f64> },
}

impl Default for GramSpec {
    fn default() -> Self {
        GramSpec::Visibilities { values: vec![0.98, 0.95, 0.90] }
    }
}

impl GramSpec {
    pub fn build(&self, n: usize) -> Result<GramMatrix> {
        match self {
            GramSpec::Homogeneous { s } => GramMatrix::homogeneous(n, *s),
            GramSpec::Matrix { rows } => GramMatrix::from_rows(rows),
            GramSpec::Visibilities { values } => GramMatrix::from_visibilities(n, values),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    /// Position of the outermost grid point. When absent the grid covers
    /// `mass` of the orbital density within its outer bin edges.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_extent: Option<f64>,
    pub mass: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { half_extent: None, mass: 0.999 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    /// Explicit noise strength; when absent, strengths are solved from
    /// `fidelity_targets`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    /// Mean amplitude fidelities; the first is used by the error budget.
    pub fidelity_targets: Vec<f64>,
    pub realizations: usize,
    /// Realizations used when solving ε for a fidelity target.
    pub calibration_realizations: usize,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig { epsilon: None, fidelity_targets: vec![0.985, 0.904], realizations: 100, calibration_realizations: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct JitterSection {
    pub enabled: bool,
    pub samples: usize,
}

impl Default for JitterSection {
    fn default() -> Self {
        JitterSection { enabled: true, samples: 1000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    /// Nested refinement sequence; must start at `modes`.
    pub modes: Vec<usize>,
    pub jitter_samples: Vec<usize>,
    pub jitter_repeats: usize,
    pub overlaps: Vec<f64>,
    /// Mean fidelities for the noise sweep, strictly decreasing.
    pub fidelities: Vec<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            modes: vec![12, 23, 34, 45, 56],
            jitter_samples: vec![10, 100, 1000],
            jitter_repeats: 20,
            overlaps: (0..=10).map(|k| k as f64 / 10.0).collect(),
            fidelities: vec![1.0, 0.99, 0.985, 0.97, 0.95, 0.93, 0.904],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    pub samples: usize,
    /// Draws per randomized permanent estimate.
    pub gurvits_samples: usize,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig { samples: 100_000, gurvits_samples: 10_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationConfig {
    pub extent_min: f64,
    pub extent_max: f64,
    pub steps: usize,
    /// Sub-bins per base bin for the fine reference grid.
    pub subdivisions: usize,
    /// Jitter draws per base-grid configuration; the reference grid uses
    /// `jitter.samples`.
    pub base_jitter_samples: usize,
    pub target_reference: f64,
    pub target_base: f64,
    pub tolerance: f64,
    pub max_gap: f64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        CalibrationConfig {
            extent_min: 3.3,
            extent_max: 3.8,
            steps: 21,
            subdivisions: 8,
            base_jitter_samples: 20_000,
            target_reference: -0.2453,
            target_base: -0.2467,
            tolerance: 0.02,
            max_gap: 0.01,
        }
    }
}

impl CalibrationConfig {
    pub fn extents(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.extent_min];
        }
        let h = (self.extent_max - self.extent_min) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.extent_min + k as f64 * h).collect()
    }

    pub fn targets(&self) -> CalibrationTargets {
        CalibrationTargets {
            reference: self.target_reference,
            base: self.target_base,
            tolerance: self.tolerance,
            max_gap: self.max_gap,
        }
    }
}

/// Complete problem instance plus run settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstanceConfig {
    pub photons: usize,
    pub modes: usize,
    pub orbitals: Vec<usize>,
    /// Efimov constant `C`.
    pub coupling: f64,
    /// Defaults to the base-grid spacing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hard_shell_radius: Option<f64>,
    pub boundary_rule: BoundaryRule,
    /// Base seed; every random stream is derived from it.
    pub seed: u64,
    pub output_dir: PathBuf,
    pub grid: GridConfig,
    pub gram: GramSpec,
    pub noise: NoiseConfig,
    pub jitter: JitterSection,
    pub sweep: SweepConfig,
    pub sampling: SamplingConfig,
    pub calibration: CalibrationConfig,
}

impl Default for InstanceConfig {
    fn default() -> Self {
        InstanceConfig {
            photons: 3,
            modes: 12,
            orbitals: vec![0, 1, 2],
            coupling: 0.0,
            hard_shell_radius: None,
            boundary_rule: BoundaryRule::Include,
            seed: 2025,
            output_dir: PathBuf::from("out"),
            grid: GridConfig::default(),
            gram: GramSpec::default(),
            noise: NoiseConfig::default(),
            jitter: JitterSection::default(),
            sweep: SweepConfig::default(),
            sampling: SamplingConfig::default(),
            calibration: CalibrationConfig::default(),
        }
    }
}

/// Labels of the derived random streams.
#[derive(Debug, Clone, Copy)]
pub enum Stream {
    Jitter = 1,
    Noise = 2,
    Sampling = 3,
    Gurvits = 4,
    Partition = 5,
}

impl InstanceConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: InstanceConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn stream_seed(&self, stream: Stream) -> u64 {
        seed::derive(self.seed, &[stream as u64])
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.orbitals.len() != self.photons {
            return fail(format!("photons = {} but {} orbitals are listed", self.photons, self.orbitals.len()));
        }
        OrbitalSet::new(self.orbitals.clone()).map_err(|e| Error::Config(e.to_string()))?;
        if self.modes < 2 || self.modes < self.photons {
            return fail(format!("modes = {} must be at least 2 and at least the photon number", self.modes));
        }
        if let Some(a) = self.grid.half_extent {
            if !(a > 0.0 && a.is_finite()) {
                return fail(format!("grid.half_extent must be positive, got {a}"));
            }
        } else if !(self.grid.mass > 0.0 && self.grid.mass < 1.0) {
            return fail(format!("grid.mass must lie in (0, 1), got {}", self.grid.mass));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return fail(format!("coupling must be finite and >= 0, got {}", self.coupling));
        }
        if let Some(d) = self.hard_shell_radius {
            if !(d > 0.0 && d.is_finite()) {
                return fail(format!("hard_shell_radius must be positive, got {d}"));
            }
        }
        self.gram.build(self.photons).map_err(|e| Error::Config(format!("gram: {e}")))?;
        if let Some(e) = self.noise.epsilon {
            if !(e >= 0.0 && e.is_finite()) {
                return fail(format!("noise.epsilon must be >= 0, got {e}"));
            }
        }
        if self.noise.fidelity_targets.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return fail("noise.fidelity_targets must lie in (0, 1]".into());
        }
        if self.noise.realizations == 0 || self.noise.calibration_realizations == 0 {
            return fail("noise realizations must be positive".into());
        }
        if self.jitter.enabled && self.jitter.samples == 0 {
            return fail("jitter.samples must be positive when jitter is enabled".into());
        }
        let m0 = self.modes;
        if self.sweep.modes.first() != Some(&m0) || self.sweep.modes.iter().any(|&m| m < m0 || (m - m0) % (m0 - 1) != 0) {
            return fail(format!("sweep.modes must start at {m0} and contain only {m0} + {}k refinements", m0 - 1));
        }
        if self.sweep.modes.windows(2).any(|w| w[0] >= w[1]) {
            return fail("sweep.modes must be strictly increasing".into());
        }
        if self.sweep.jitter_samples.is_empty() || self.sweep.jitter_samples.contains(&0) || self.sweep.jitter_repeats < 2 {
            return fail("sweep needs positive jitter sizes and at least two repeats".into());
        }
        if self.sweep.overlaps.iter().any(|s| !(0.0..=1.0).contains(s)) {
            return fail("sweep.overlaps must lie in [0, 1]".into());
        }
        if self.sweep.fidelities.windows(2).any(|w| w[0] <= w[1]) || self.sweep.fidelities.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return fail("sweep.fidelities must be strictly decreasing values in (0, 1]".into());
        }
        if self.sampling.samples == 0 || self.sampling.gurvits_samples == 0 {
            return fail("sampling sizes must be positive".into());
        }
        let c = &self.calibration;
        if !(c.extent_min > 0.0 && c.extent_max >= c.extent_min) || c.steps == 0 || c.subdivisions < 2 || c.base_jitter_samples == 0 {
            return fail("calibration needs 0 < extent_min <= extent_max, steps >= 1, subdivisions >= 2, base_jitter_samples >= 1".into());
        }
        Ok(())
    }

    pub fn orbital_set(&self) -> Result<OrbitalSet> {
        OrbitalSet::new(self.orbitals.clone())
    }

    pub fn base_grid(&self) -> Result<SpatialGrid> {
        match self.grid.half_extent {
            Some(a) => SpatialGrid::uniform(self.modes, a),
            None => SpatialGrid::covering(&self.orbital_set()?, self.modes, self.grid.mass),
        }
    }

    pub fn gram_matrix(&self) -> Result<GramMatrix> {
        self.gram.build(self.photons)
    }

    pub fn jitter_config(&self) -> JitterConfig {
        JitterConfig {
            enabled: self.jitter.enabled,
            samples: if self.jitter.enabled { self.jitter.samples } else { 1 },
            seed: self.stream_seed(Stream::Jitter),
            boundary_rule: self.boundary_rule,
        }
    }

    pub fn instance(&self) -> Result<Instance> {
        self.validate()?;
        let grid = self.base_grid()?;
        let params = EfimovParams::new(self.coupling, self.hard_shell_radius.unwrap_or(grid.spacing()))?;
        Instance::new(
            self.orbital_set()?,
            grid,
            params,
            self.gram_matrix()?,
            self.jitter_config(),
            self.stream_seed(Stream::Noise),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips() {
        let cfg = InstanceConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(InstanceConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn empty_document_is_default() {
        assert_eq!(InstanceConfig::from_toml("").unwrap(), InstanceConfig::default());
    }

    #[test]
    fn gram_variants_parse() {
        let cfg = InstanceConfig::from_toml("[gram]\nkind = \"homogeneous\"\ns = 0.5\n").unwrap();
        assert_eq!(cfg.gram_matrix().unwrap().get(0, 1), 0.5);
        let cfg =
            InstanceConfig::from_toml("[gram]\nkind = \"matrix\"\nrows = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]\n")
                .unwrap();
        assert_eq!(cfg.gram_matrix().unwrap(), GramMatrix::distinguishable(3));
    }

    #[test]
    fn invalid_settings_are_config_errors() {
        for text in [
            "photons = 2",
            "modes = 1",
            "coupling = -1.0",
            "unknown_key = 3",
            "[gram]\nkind = \"homogeneous\"\ns = 2.0\n",
            "[sweep]\nmodes = [12, 20]",
            "[jitter]\nsamples = 0",
            "boundary_rule = \"sideways\"",
        ] {
            let err = InstanceConfig::from_toml(text).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{text}: {err}");
            assert_eq!(err.exit_code(), 1);
        }
    }

    #[test]
    fn instance_uses_spacing_as_shell_radius() {
        let inst = InstanceConfig::default().instance().unwrap();
        assert_eq!(inst.params.hard_shell_radius, inst.base_grid.spacing());
        assert_eq!(inst.base_grid.len(), 12);
    }
}
