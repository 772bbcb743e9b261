use num_complex::Complex64;
use rand_distr::{Distribution, Normal};

use crate::linalg::{amplitude_fidelity, nearest_unitary, ComplexMatrix, UnitaryMatrix};
use crate::{seed, Error, Result};

/// Adds i.i.d. complex Gaussian noise with `E|z|² = ε²` to every element of
/// `u`, projects back to the nearest unitary, and returns it together with
/// its amplitude fidelity against `u`.
pub fn perturb_unitary(u: &UnitaryMatrix, epsilon: f64, seed: u64) -> Result<(UnitaryMatrix, f64)> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("noise strength must be finite and non-negative, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok((u.clone(), amplitude_fidelity(u, u)?));
    }
    let normal = Normal::new(0.0, epsilon * std::f64::consts::FRAC_1_SQRT_2).expect("valid sigma");
    let mut rng = seed::rng(seed);
    let m = u.dim();
    let noisy = ComplexMatrix::from_fn(m, m, |i, j| {
        u.get(i, j) + Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng))
    })?;
    let projected = nearest_unitary(&noisy)?;
    let fidelity = amplitude_fidelity(u, &projected)?;
    Ok((projected, fidelity))
}

/// Mean fidelity over `realizations` noisy copies; realization `r` uses seed
/// `derive(seed, [r])` so different `ε` share noise directions.
pub fn mean_fidelity(u: &UnitaryMatrix, epsilon: f64, realizations: usize, seed: u64) -> Result<f64> {
    if realizations == 0 {
        return Err(Error::InvalidArgument("need at least one realization".into()));
    }
    let mut sum = 0.0;
    for r in 0..realizations {
        sum += perturb_unitary(u, epsilon, seed::derive(seed, &[r as u64]))?.1;
    }
    Ok(sum / realizations as f64)
}

/// Noise strength whose ensemble-mean fidelity equals `target`, by bisection.
pub fn epsilon_for_fidelity(u: &UnitaryMatrix, target: f64, realizations: usize, seed: u64) -> Result<f64> {
    if !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidArgument(format!("target fidelity {target} outside (0, 1]")));
    }
    if target >= 1.0 {
        return Ok(0.0);
    }
    let mut lo = 0.0;
    let mut hi = 0.05;
    while mean_fidelity(u, hi, realizations, seed)? > target {
        lo = hi;
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::InvalidArgument(format!("fidelity {target} is below the reachable range")));
        }
    }
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if mean_fidelity(u, mid, realizations, seed)? > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
