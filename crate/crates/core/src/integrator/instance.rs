use crate::linalg::UnitaryMatrix;
use crate::physics::{encode_unitary, EfimovParams, Encoding, OrbitalSet, SpatialGrid};
use crate::sampler::{enumerate_distribution, GramMatrix, OccupationPattern, OutputDistribution};
use crate::{Error, Result};

use super::{exact_e1, EnergyEstimate, JitterConfig};

/// A fully specified problem: orbitals on the base grid, the potential, the
/// photon overlaps and the integrator settings.
#[derive(Debug, Clone)]
pub struct Instance {
    pub orbitals: OrbitalSet,
    /// The unrefined grid; refinements nest inside it.
    pub base_grid: SpatialGrid,
    pub params: EfimovParams,
    pub gram: GramMatrix,
    pub jitter: JitterConfig,
    pub noise_seed: u64,
}

impl Instance {
    pub fn new(
        orbitals: OrbitalSet,
        base_grid: SpatialGrid,
        params: EfimovParams,
        gram: GramMatrix,
        jitter: JitterConfig,
        noise_seed: u64,
    ) -> Result<Self> {
        if gram.dim() != orbitals.len() {
            return Err(Error::Config(format!(
                "Gram matrix is {}x{} but {} orbitals are occupied",
                gram.dim(),
                gram.dim(),
                orbitals.len()
            )));
        }
        if orbitals.len() > base_grid.len() {
            return Err(Error::Config("more photons than modes".into()));
        }
        jitter.validate()?;
        Ok(Instance { orbitals, base_grid, params, gram, jitter, noise_seed })
    }

    pub fn photons(&self) -> usize {
        self.orbitals.len()
    }

    /// One photon per orbital in the first input modes.
    pub fn input(&self, modes: usize) -> Result<OccupationPattern> {
        OccupationPattern::first_modes(modes, self.photons())
    }

    /// Nested refinement of the base grid with exactly `modes` points.
    pub fn refined_grid(&self, modes: usize) -> Result<SpatialGrid> {
        let m0 = self.base_grid.len();
        if modes < m0 || (modes - m0) % (m0 - 1) != 0 {
            return Err(Error::InvalidArgument(format!(
                "{modes} modes is not a nested refinement of the {m0}-mode grid (need {m0} + {}k)",
                m0 - 1
            )));
        }
        Ok(self.base_grid.refine((modes - m0) / (m0 - 1)))
    }

    pub fn encode(&self, grid: &SpatialGrid) -> Result<Encoding> {
        encode_unitary(&self.orbitals, grid)
    }

    /// Collision-free postselected distribution for `u` and `gram`.
    pub fn distribution(&self, u: &UnitaryMatrix, gram: &GramMatrix) -> Result<OutputDistribution> {
        enumerate_distribution(u, &self.input(u.dim())?, gram, true)
    }

    pub fn estimate(&self, dist: &OutputDistribution, grid: &SpatialGrid, jitter: &JitterConfig) -> Result<EnergyEstimate> {
        exact_e1(dist, grid, &self.params, jitter)
    }

    /// Ideal (unperturbed) estimate on `grid` with the instance's overlaps.
    pub fn ideal_estimate(&self, grid: &SpatialGrid, gram: &GramMatrix, jitter: &JitterConfig) -> Result<EnergyEstimate> {
        let enc = self.encode(grid)?;
        let dist = self.distribution(&enc.unitary, gram)?;
        self.estimate(&dist, grid, jitter)
    }
}
