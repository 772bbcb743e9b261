use num_complex::Complex64;

use super::ComplexMatrix;
use crate::{Error, Result};

/// Largest dimension accepted by the exact permanent routines.
pub const MAX_PERMANENT_DIM: usize = 30;

/// Exact permanent algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PermanentMethod {
    /// Ryser inclusion-exclusion with Gray-code column updates, O(2^n n).
    #[default]
    Ryser,
    /// Glynn's formula with Gray-code sign updates, O(2^(n-1) n).
    Glynn,
}

/// Permanent of a square matrix using the default (Ryser) algorithm.
pub fn permanent(a: &ComplexMatrix) -> Result<Complex64> {
    permanent_with(a, PermanentMethod::Ryser)
}

pub fn permanent_with(a: &ComplexMatrix, method: PermanentMethod) -> Result<Complex64> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("permanent needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    if n > MAX_PERMANENT_DIM {
        return Err(Error::Size { size: n, limit: MAX_PERMANENT_DIM });
    }
    Ok(match n {
        1 => a.get(0, 0),
        2 => a.get(0, 0) * a.get(1, 1) + a.get(0, 1) * a.get(1, 0),
        _ => match method {
            PermanentMethod::Ryser => ryser(a),
            PermanentMethod::Glynn => glynn(a),
        },
    })
}

// Perm(A) = (-1)^n sum_{S} (-1)^{|S|} prod_i sum_{j in S} a_ij, visiting the
// column subsets in Gray-code order so each step touches one column.
fn ryser(a: &ComplexMatrix) -> Complex64 {
    let n = a.rows();
    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut in_set = vec![false; n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let add = !in_set[j];
        in_set[j] = add;
        if add {
            size += 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += a.get(i, j);
            }
        } else {
            size -= 1;
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= a.get(i, j);
            }
        }
        let prod = row_sums.iter().fold(Complex64::new(1.0, 0.0), |acc, &s| acc * s);
        if size % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        -total
    } else {
        total
    }
}

// Perm(A) = 2^{1-n} sum_{d, d_0 = +1} (prod_k d_k) prod_j sum_i d_i a_ij
fn glynn(a: &ComplexMatrix) -> Complex64 {
    let n = a.rows();
    let mut col_sums: Vec<Complex64> = (0..n).map(|j| (0..n).map(|i| a.get(i, j)).sum()).collect();
    let mut signs = vec![1.0f64; n];
    let mut parity = 1.0f64;
    let mut total = col_sums.iter().fold(Complex64::new(1.0, 0.0), |acc, &s| acc * s);
    for k in 1u64..(1u64 << (n - 1)) {
        // Flip row i (never row 0).
        let i = k.trailing_zeros() as usize + 1;
        signs[i] = -signs[i];
        parity = -parity;
        let scale = 2.0 * signs[i];
        for (j, s) in col_sums.iter_mut().enumerate() {
            *s += scale * a.get(i, j);
        }
        let prod = col_sums.iter().fold(Complex64::new(1.0, 0.0), |acc, &s| acc * s);
        total += parity * prod;
    }
    total / (1u64 << (n - 1)) as f64
}
