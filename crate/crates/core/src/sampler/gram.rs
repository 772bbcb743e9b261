use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const PSD_TOLERANCE: f64 = 1e-10;
const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Real pairwise wave-function overlaps `s_ij = ⟨φ_i|φ_j⟩` between photons.
///
/// All-ones is fully indistinguishable, the identity fully distinguishable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct GramMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl TryFrom<Vec<Vec<f64>>> for GramMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        GramMatrix::from_rows(&rows)
    }
}

impl From<GramMatrix> for Vec<Vec<f64>> {
    fn from(g: GramMatrix) -> Self {
        (0..g.n).map(|i| g.entries[i * g.n..(i + 1) * g.n].to_vec()).collect()
    }
}

impl GramMatrix {
    /// Validates symmetry, unit diagonal, entry range and positive
    /// semidefiniteness.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Model("Gram matrix must be square and non-empty".into()));
        }
        let entries: Vec<f64> = rows.concat();
        for i in 0..n {
            if (entries[i * n + i] - 1.0).abs() > SYMMETRY_TOLERANCE {
                return Err(Error::Model(format!("Gram diagonal entry {i} is {} (must be 1)", entries[i * n + i])));
            }
            for j in 0..n {
                let v = entries[i * n + j];
                if !v.is_finite() || !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Model(format!("overlap s[{i}][{j}] = {v} outside [-1, 1]")));
                }
                if (v - entries[j * n + i]).abs() > SYMMETRY_TOLERANCE {
                    return Err(Error::Model(format!("Gram matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(DMatrix::from_row_slice(n, n, &entries));
        let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min_eig < -PSD_TOLERANCE {
            return Err(Error::Model(format!("Gram matrix not positive semidefinite (eigenvalue {min_eig:e})")));
        }
        Ok(GramMatrix { n, entries })
    }

    pub fn indistinguishable(n: usize) -> Self {
        GramMatrix { n, entries: vec![1.0; n * n] }
    }

    pub fn distinguishable(n: usize) -> Self {
        Self::homogeneous(n, 0.0).expect("identity is a valid Gram matrix")
    }

    /// Equal overlap `s` for every pair.
    pub fn homogeneous(n: usize, s: f64) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { s }).collect()).collect();
        Self::from_rows(&rows)
    }

    /// Overlaps from pairwise HOM visibilities via `s = √V` (real, non-negative
    /// overlaps). Visibilities are listed pair by pair in row-major upper
    /// triangle order: (1,2), (1,3), …, (2,3), ….
    pub fn from_visibilities(n: usize, visibilities: &[f64]) -> Result<Self> {
        let pairs = n * (n.saturating_sub(1)) / 2;
        if visibilities.len() != pairs {
            return Err(Error::Model(format!("{n} photons need {pairs} pair visibilities, got {}", visibilities.len())));
        }
        let mut rows = vec![vec![1.0; n]; n];
        let mut k = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = visibilities[k];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Model(format!("visibility {v} outside [0, 1]")));
                }
                rows[i][j] = v.sqrt();
                rows[j][i] = v.sqrt();
                k += 1;
            }
        }
        Self::from_rows(&rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    /// Mean off-diagonal overlap `s̄` (1 for a single photon).
    pub fn mean_overlap(&self) -> f64 {
        if self.n < 2 {
            return 1.0;
        }
        let mut sum = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                sum += self.get(i, j);
            }
        }
        sum / (self.n * (self.n - 1) / 2) as f64
    }

    pub fn is_indistinguishable(&self) -> bool {
        self.entries.iter().all(|&v| v == 1.0)
    }
}
