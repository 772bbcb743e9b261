use serde::{Deserialize, Serialize};

use super::ParticleConfiguration;
use crate::{Error, Result};

/// Relative band around `d_HS` treated as lying exactly on the hard-shell
/// boundary. Grid distances that are integer multiples of the spacing land
/// within a few ulps of the radius, never on it bit-for-bit.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

const DIVERGENCE_FLOOR: f64 = 1e-15;

/// How pair distances equal to the hard-shell radius are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryRule {
    /// Accept `r_ij ≥ d_HS`.
    #[default]
    Include,
    /// Accept only `r_ij > d_HS`.
    Exclude,
}

impl std::fmt::Display for BoundaryRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            BoundaryRule::Include => "include",
            BoundaryRule::Exclude => "exclude",
        })
    }
}

/// Coupling `C` and hard-shell radius of `V = −(C + 1/4)/R²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfimovParams {
    pub c: f64,
    pub hard_shell_radius: f64,
}

impl EfimovParams {
    pub fn new(c: f64, hard_shell_radius: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidArgument(format!("Efimov constant must be finite and >= 0, got {c}")));
        }
        if !(hard_shell_radius > 0.0) || !hard_shell_radius.is_finite() {
            return Err(Error::InvalidArgument(format!("hard-shell radius must be positive, got {hard_shell_radius}")));
        }
        Ok(EfimovParams { c, hard_shell_radius })
    }

    /// Potential on raw positions; see [`efimov_potential`].
    pub fn potential(&self, x: &[f64]) -> Result<f64> {
        let r2 = hyperradius_squared(x)?;
        if r2 <= DIVERGENCE_FLOOR {
            return Err(Error::Divergence(r2));
        }
        Ok(-(self.c + 0.25) / r2)
    }

    /// Hard-shell test on raw positions; see [`hard_shell`].
    pub fn accepts(&self, x: &[f64], rule: BoundaryRule) -> bool {
        shell_accepts(x, self.hard_shell_radius, rule)
    }
}

/// `R² = (2/3)(r₁₂² + r₁₃² + r₂₃²)`.
fn hyperradius_squared(x: &[f64]) -> Result<f64> {
    if x.len() != 3 {
        return Err(Error::InvalidArgument(format!("the three-body potential needs 3 particles, got {}", x.len())));
    }
    let r12 = x[0] - x[1];
    let r13 = x[0] - x[2];
    let r23 = x[1] - x[2];
    Ok(2.0 / 3.0 * (r12 * r12 + r13 * r13 + r23 * r23))
}

pub(crate) fn shell_accepts(x: &[f64], radius: f64, rule: BoundaryRule) -> bool {
    let band = BOUNDARY_TOLERANCE * radius;
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            let r = (x[i] - x[j]).abs();
            let ok = match rule {
                BoundaryRule::Include => r >= radius - band,
                BoundaryRule::Exclude => r > radius + band,
            };
            if !ok {
                return false;
            }
        }
    }
    true
}

/// `V_Ef(X) = −(C + 1/4)/R²`; errors when `R²` is numerically zero.
pub fn efimov_potential(x: &ParticleConfiguration, params: &EfimovParams) -> Result<f64> {
    params.potential(x.positions())
}

/// Whether every pairwise distance clears `d_HS` under `rule`.
pub fn hard_shell(x: &ParticleConfiguration, d_hs: f64, rule: BoundaryRule) -> bool {
    shell_accepts(x.positions(), d_hs, rule)
}
