use serde::{Deserialize, Serialize};

use super::orbital::{density_mass_within, OrbitalSet};
use crate::sampler::OccupationPattern;
use crate::{Error, Result};

/// Uniform 1-D grid of mode positions `χ_j` with their bins.
///
/// Interior bin edges are midpoints between neighbours; the two outer bins
/// extend half a spacing past the outermost positions, so every bin is
/// `[χ_j − Δx/2, χ_j + Δx/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialGrid {
    positions: Vec<f64>,
    spacing: f64,
}

impl SpatialGrid {
    /// `m` equally spaced positions spanning `[−half_extent, half_extent]`.
    pub fn uniform(m: usize, half_extent: f64) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidArgument(format!("grid needs at least 2 modes, got {m}")));
        }
        if !(half_extent > 0.0) || !half_extent.is_finite() {
            return Err(Error::InvalidArgument(format!("grid extent must be positive, got {half_extent}")));
        }
        let spacing = 2.0 * half_extent / (m - 1) as f64;
        let positions = (0..m)
            .map(|j| {
                // Mirror the right half so the grid is exactly symmetric.
                let k = j.min(m - 1 - j) as f64;
                let x = -half_extent + k * spacing;
                if j < m - 1 - j { x } else if j == m - 1 - j { 0.0 } else { -x }
            })
            .collect();
        Ok(SpatialGrid { positions, spacing })
    }

    /// `m`-mode grid whose outer bin edges enclose `mass` of the orbitals'
    /// one-body density.
    pub fn covering(orbitals: &OrbitalSet, m: usize, mass: f64) -> Result<Self> {
        Self::uniform(m, half_extent_for_mass(orbitals, m, mass)?)
    }

    /// Nested refinement inserting `inserted` equally spaced points in every
    /// gap; the original positions are kept exactly.
    pub fn refine(&self, inserted: usize) -> Self {
        let step = self.spacing / (inserted + 1) as f64;
        let mut positions = Vec::with_capacity((self.len() - 1) * (inserted + 1) + 1);
        for w in self.positions.windows(2) {
            positions.push(w[0]);
            for t in 1..=inserted {
                positions.push(w[0] + t as f64 * step);
            }
        }
        positions.push(*self.positions.last().expect("non-empty grid"));
        SpatialGrid { positions, spacing: step }
    }

    /// Splits every bin into `parts` equal sub-bins over the same outer edges.
    pub fn subdivide(&self, parts: usize) -> Self {
        let parts = parts.max(1);
        let step = self.spacing / parts as f64;
        let positions = self
            .positions
            .iter()
            .flat_map(|&c| (0..parts).map(move |t| c + (t as f64 - 0.5 * (parts - 1) as f64) * step))
            .collect();
        SpatialGrid { positions, spacing: step }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_extent(&self) -> f64 {
        self.positions.last().copied().unwrap_or(0.0)
    }

    /// `[lo, hi]` of mode `j`.
    pub fn bin(&self, j: usize) -> (f64, f64) {
        let c = self.positions[j];
        (c - 0.5 * self.spacing, c + 0.5 * self.spacing)
    }

    /// Bin edges: outer edges plus neighbour midpoints, `m + 1` values.
    pub fn bin_edges(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.len() + 1);
        edges.push(self.bin(0).0);
        edges.extend(self.positions.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        edges.push(self.bin(self.len() - 1).1);
        edges
    }

    /// Index of the grid point nearest to `x`.
    pub fn nearest(&self, x: f64) -> usize {
        let k = ((x - self.positions[0]) / self.spacing).round();
        k.clamp(0.0, (self.len() - 1) as f64) as usize
    }
}

/// Half extent of an `m`-point grid whose outer bin edges enclose `mass` of
/// the one-body density.
pub(crate) fn half_extent_for_mass(orbitals: &OrbitalSet, m: usize, mass: f64) -> Result<f64> {
    if !(mass > 0.0 && mass < 1.0) {
        return Err(Error::InvalidArgument(format!("enclosed mass must be in (0, 1), got {mass}")));
    }
    let (mut lo, mut hi) = (0.0, 20.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if density_mass_within(orbitals, mid) < mass {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let edge = 0.5 * (lo + hi);
    // Outer edge = a + Δx/2 with Δx = 2a/(m−1).
    Ok(edge * (m - 1) as f64 / m as f64)
}

/// Particle positions, ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleConfiguration {
    positions: Vec<f64>,
}

impl ParticleConfiguration {
    pub fn new(mut positions: Vec<f64>) -> Result<Self> {
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("non-finite particle position".into()));
        }
        positions.sort_by(f64::total_cmp);
        Ok(ParticleConfiguration { positions })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn shifted(&self, c: f64) -> Self {
        ParticleConfiguration { positions: self.positions.iter().map(|x| x + c).collect() }
    }
}

/// Occupied mode `j` becomes position `χ_j`.
pub fn pattern_to_configuration(p: &OccupationPattern, grid: &SpatialGrid) -> Result<ParticleConfiguration> {
    if p.modes() != grid.len() {
        return Err(Error::Pattern(format!("pattern has {} modes, grid has {}", p.modes(), grid.len())));
    }
    if !p.is_collision_free() {
        return Err(Error::Pattern(format!("pattern {p} has collisions and maps to no configuration")));
    }
    ParticleConfiguration::new(p.occupied().into_iter().map(|j| grid.positions()[j]).collect())
}

/// Inverse of [`pattern_to_configuration`]: snap each particle to its nearest
/// grid point.
pub fn snap_to_pattern(x: &ParticleConfiguration, grid: &SpatialGrid) -> Result<OccupationPattern> {
    let modes: Vec<usize> = x.positions().iter().map(|&p| grid.nearest(p)).collect();
    OccupationPattern::from_modes(grid.len(), &modes)
}
