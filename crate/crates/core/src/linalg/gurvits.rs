use num_complex::Complex64;
use rand::Rng;

use super::ComplexMatrix;
use crate::{seed, Error, Result};

/// Randomized permanent estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GurvitsEstimate {
    pub estimate: Complex64,
    /// Sample standard deviation of the per-draw values divided by √samples.
    pub stderr: f64,
    pub samples: usize,
}

/// Unbiased Glynn/Gurvits estimator of `Perm(A)`.
///
/// Each draw picks a uniform sign vector `x ∈ {±1}^n` and evaluates
/// `(∏_i x_i) ∏_j Σ_i x_i a_ij`, whose expectation is the permanent. For
/// matrices with operator norm at most one every draw is bounded by one in
/// modulus, so the additive error decays as `samples^(-1/2)`.
pub fn gurvits_estimate(a: &ComplexMatrix, num_samples: usize, seed: u64) -> Result<GurvitsEstimate> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("permanent needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    if num_samples == 0 {
        return Err(Error::InvalidArgument("gurvits_estimate needs at least one sample".into()));
    }
    let n = a.rows();
    let mut rng = seed::rng(seed);
    let mut signs = vec![0.0f64; n];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut sum_sq = 0.0f64;
    for _ in 0..num_samples {
        let mut parity = 1.0;
        for s in signs.iter_mut() {
            *s = if rng.random::<bool>() { 1.0 } else { -1.0 };
            parity *= *s;
        }
        let mut value = Complex64::new(parity, 0.0);
        for j in 0..n {
            let col: Complex64 = (0..n).map(|i| signs[i] * a.get(i, j)).sum();
            value *= col;
        }
        sum += value;
        sum_sq += value.norm_sqr();
    }
    let count = num_samples as f64;
    let mean = sum / count;
    let stderr = if num_samples > 1 {
        let var = ((sum_sq - count * mean.norm_sqr()) / (count - 1.0)).max(0.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(GurvitsEstimate { estimate: mean, stderr, samples: num_samples })
}
