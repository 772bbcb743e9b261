use num_complex::Complex64;

use super::{orbital, OrbitalSet, SpatialGrid};
use crate::linalg::{nearest_unitary, ComplexMatrix, UnitaryMatrix};
use crate::{Error, Result};

/// Smallest singular value of the orbital rows accepted before the grid is
/// deemed too coarse to resolve them.
const RANK_TOLERANCE: f64 = 1e-6;

/// Encoding unitary with its distance from the raw orbital samples.
#[derive(Debug, Clone)]
pub struct Encoding {
    pub unitary: UnitaryMatrix,
    /// Row-normalized `√Δx ψ_i(χ_j)` rows before completion and projection.
    pub raw_rows: Vec<Vec<f64>>,
    /// Max element-wise `|U_ij − raw_ij|` over the orbital rows.
    pub raw_deviation: f64,
}

/// Builds `U` with `U_ij ≈ √Δx ψ_i(χ_j)` for the orbital rows, completes the
/// remaining rows to an orthonormal basis by Gram–Schmidt on canonical basis
/// vectors, and polar-projects the result onto the unitary group.
pub fn encode_unitary(orbitals: &OrbitalSet, grid: &SpatialGrid) -> Result<Encoding> {
    let m = grid.len();
    let k = orbitals.len();
    if k > m {
        return Err(Error::Dimension(format!("{k} orbitals cannot be encoded on {m} modes")));
    }
    let scale = grid.spacing().sqrt();
    let raw_rows: Vec<Vec<f64>> = orbitals
        .indices()
        .iter()
        .map(|&i| {
            let row: Vec<f64> = grid.positions().iter().map(|&x| scale * orbital(i, x)).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            row.into_iter().map(|v| v / norm).collect()
        })
        .collect();

    let orbital_block = ComplexMatrix::from_real_rows(&raw_rows)?;
    let sv = orbital_block.to_nalgebra().singular_values();
    let smallest = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > RANK_TOLERANCE) {
        return Err(Error::Dimension(format!(
            "grid of {m} modes is too coarse for {k} orbitals (smallest singular value {smallest:e})"
        )));
    }

    let mut rows = raw_rows.clone();
    let mut basis: Vec<Vec<f64>> = orthonormalize(&raw_rows);
    for e in 0..m {
        if rows.len() == m {
            break;
        }
        let mut v = vec![0.0; m];
        v[e] = 1.0;
        // Two passes of modified Gram–Schmidt.
        for _ in 0..2 {
            for b in &basis {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-6 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v.clone());
            rows.push(v);
        }
    }
    if rows.len() != m {
        return Err(Error::Dimension("failed to complete the orbital rows to a basis".into()));
    }

    let full = ComplexMatrix::from_real_rows(&rows)?;
    let unitary = nearest_unitary(&full)?;
    let mut raw_deviation = 0.0f64;
    for (i, row) in raw_rows.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            raw_deviation = raw_deviation.max((unitary.get(i, j) - Complex64::new(v, 0.0)).norm());
        }
    }
    Ok(Encoding { unitary, raw_rows, raw_deviation })
}

fn orthonormalize(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(rows.len());
    for r in rows {
        let mut v = r.clone();
        for _ in 0..2 {
            for b in &out {
                let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= norm);
        out.push(v);
    }
    out
}
