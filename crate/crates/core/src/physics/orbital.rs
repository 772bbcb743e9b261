use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Normalized harmonic-oscillator eigenfunction `ψ_i(x)` in oscillator-length
/// units, by the three-term Hermite-function recurrence
/// `ψ_{k+1} = √(2/(k+1)) x ψ_k − √(k/(k+1)) ψ_{k−1}`.
pub fn orbital(i: usize, x: f64) -> f64 {
    let psi0 = std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp();
    if i == 0 {
        return psi0;
    }
    let mut prev = psi0;
    let mut cur = std::f64::consts::SQRT_2 * x * psi0;
    for k in 1..i {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * x * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// The occupied single-particle orbitals, one per photon.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct OrbitalSet {
    indices: Vec<usize>,
}

impl TryFrom<Vec<usize>> for OrbitalSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        OrbitalSet::new(v)
    }
}

impl From<OrbitalSet> for Vec<usize> {
    fn from(o: OrbitalSet) -> Self {
        o.indices
    }
}

impl Default for OrbitalSet {
    fn default() -> Self {
        OrbitalSet { indices: vec![0, 1, 2] }
    }
}

impl OrbitalSet {
    pub fn new(indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::InvalidArgument("orbital set is empty".into()));
        }
        let mut sorted = indices.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(format!("orbital indices repeat: {indices:?}")));
        }
        Ok(OrbitalSet { indices })
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// One-body density `n⁻¹ Σ_i ψ_i(x)²`.
    pub fn density(&self, x: f64) -> f64 {
        self.indices.iter().map(|&i| orbital(i, x).powi(2)).sum::<f64>() / self.len() as f64
    }
}

/// `∫_{−e}^{e}` of the one-body density, composite Simpson with 2000 panels.
pub fn density_mass_within(orbitals: &OrbitalSet, e: f64) -> f64 {
    let panels = 2000;
    let h = e / panels as f64;
    let mut s = orbitals.density(0.0) + orbitals.density(e);
    for k in 1..panels {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * orbitals.density(k as f64 * h);
    }
    // Even integrand: double the half-line integral.
    2.0 * s * h / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_values() {
        assert!((orbital(0, 0.0) - std::f64::consts::PI.powf(-0.25)).abs() < 1e-15);
        assert!((orbital(0, 0.0) - 0.7511255444649425).abs() < 1e-12);
        assert_eq!(orbital(1, 0.0), 0.0);
        // ψ_2(x) = π^{-1/4} (2x² − 1) e^{-x²/2} / √2
        let x: f64 = 0.7;
        let closed = std::f64::consts::PI.powf(-0.25) * (2.0 * x * x - 1.0) * (-0.5 * x * x).exp() / 2f64.sqrt();
        assert!((orbital(2, x) - closed).abs() < 1e-14);
    }

    #[test]
    fn high_orders_stay_finite() {
        for &x in &[-9.0, -3.3, 0.1, 5.0, 12.0] {
            assert!(orbital(50, x).is_finite());
        }
    }

    #[test]
    fn rejects_duplicates() {
        assert!(OrbitalSet::new(vec![0, 1, 1]).is_err());
        assert!(OrbitalSet::new(vec![]).is_err());
    }

    #[test]
    fn density_integrates_to_one() {
        assert!((density_mass_within(&OrbitalSet::default(), 12.0) - 1.0).abs() < 1e-10);
    }
}
