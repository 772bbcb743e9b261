use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ComplexMatrix;
use crate::{seed, Error, Result};

/// Maximum accepted `‖U†U − I‖_max` for a [`UnitaryMatrix`].
pub const UNITARITY_TOLERANCE: f64 = 1e-10;

const SINGULAR_TOLERANCE: f64 = 1e-12;

/// Square matrix certified unitary at construction.
///
/// Row index is the input mode and column index the output mode, so
/// `U[i][j]` is the amplitude for a photon entering mode `i` to leave in
/// mode `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct UnitaryMatrix {
    matrix: ComplexMatrix,
    defect: f64,
}

impl TryFrom<ComplexMatrix> for UnitaryMatrix {
    type Error = Error;

    fn try_from(m: ComplexMatrix) -> Result<Self> {
        UnitaryMatrix::new(m)
    }
}

impl From<UnitaryMatrix> for ComplexMatrix {
    fn from(u: UnitaryMatrix) -> Self {
        u.matrix
    }
}

impl UnitaryMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::Dimension(format!("unitary must be square, got {}x{}", matrix.rows(), matrix.cols())));
        }
        let defect = matrix.unitarity_defect();
        if defect > UNITARITY_TOLERANCE {
            return Err(Error::NotUnitary(defect));
        }
        Ok(UnitaryMatrix { matrix, defect })
    }

    pub fn identity(m: usize) -> Self {
        UnitaryMatrix { matrix: ComplexMatrix::identity(m), defect: 0.0 }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.matrix.get(i, j)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.defect
    }

    /// Short content hash used to tag derived data.
    pub fn fingerprint(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update((self.dim() as u64).to_le_bytes());
        for z in self.matrix.entries() {
            hasher.update(z.re.to_le_bytes());
            hasher.update(z.im.to_le_bytes());
        }
        hex::encode(&hasher.finalize()[..8])
    }
}

/// Polar factor `W V†` of the SVD `A = W Σ V†`: the unitary closest to `A`
/// in Frobenius norm.
pub fn nearest_unitary(a: &ComplexMatrix) -> Result<UnitaryMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("nearest_unitary needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let svd = a.to_nalgebra().svd(true, true);
    let smallest = svd.singular_values.iter().copied().fold(f64::INFINITY, f64::min);
    if !(smallest > SINGULAR_TOLERANCE) {
        return Err(Error::Singular(smallest));
    }
    let w = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let polar: DMatrix<Complex64> = w * v_t;
    UnitaryMatrix::new(ComplexMatrix::from_nalgebra(&polar)?)
}

/// Haar-random unitary from the phase-corrected QR decomposition of a
/// complex Ginibre matrix.
pub fn haar_random(m: usize, seed: u64) -> Result<UnitaryMatrix> {
    let mut rng = seed::rng(seed);
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let g = DMatrix::<Complex64>::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re * scale, im * scale)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..m {
            q[(i, j)] *= phase;
        }
    }
    UnitaryMatrix::new(ComplexMatrix::from_nalgebra(&q)?)
}

/// Amplitude fidelity `m⁻¹ Tr(|U_set†| |U_get|)` with element-wise moduli.
///
/// Not clamped: round-off can push the value marginally above one.
pub fn amplitude_fidelity(u_set: &UnitaryMatrix, u_get: &UnitaryMatrix) -> Result<f64> {
    let m = u_set.dim();
    if u_get.dim() != m {
        return Err(Error::Dimension(format!("fidelity of {m}-mode and {}-mode unitaries", u_get.dim())));
    }
    // Tr(|U_set†| |U_get|) = Σ_i Σ_k |U_set†|_ik |U_get|_ki, and |U_set†|_ik = |U_set_ki|.
    let mut trace = 0.0;
    for i in 0..m {
        for k in 0..m {
            trace += u_set.get(k, i).norm() * u_get.get(k, i).norm();
        }
    }
    Ok(trace / m as f64)
}
