use crate::sampler::OutputDistribution;
use crate::{Error, Result};

/// `½ Σ |P − Q|` over a shared, identically ordered support.
pub fn tvd(p: &OutputDistribution, q: &OutputDistribution) -> Result<f64> {
    if p.patterns() != q.patterns() {
        return Err(Error::Data(format!(
            "distributions have different supports ({} vs {} patterns)",
            p.len(),
            q.len()
        )));
    }
    let d: f64 = p.probs().iter().zip(q.probs()).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * d).clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampler::{collision_free_support, DistributionMeta, OccupationPattern};

    fn meta() -> DistributionMeta {
        DistributionMeta {
            modes: 4,
            photons: 2,
            unitary_fingerprint: None,
            input: None,
            gram: None,
            collision_free: true,
            postselection_mass: 1.0,
            source: "test".into(),
        }
    }

    #[test]
    fn point_masses() {
        let support = collision_free_support(4, 2);
        let a: OccupationPattern = "1100".parse().unwrap();
        let b: OccupationPattern = "0011".parse().unwrap();
        let p = OutputDistribution::point_mass(support.clone(), &a, meta()).unwrap();
        let q = OutputDistribution::point_mass(support, &b, meta()).unwrap();
        assert_eq!(tvd(&p, &p).unwrap(), 0.0);
        assert_eq!(tvd(&p, &q).unwrap(), 1.0);
    }

    #[test]
    fn support_mismatch() {
        let a: OccupationPattern = "1100".parse().unwrap();
        let p = OutputDistribution::point_mass(collision_free_support(4, 2), &a, meta()).unwrap();
        let q = OutputDistribution::point_mass(vec![a.clone()], &a, meta()).unwrap();
        assert!(matches!(tvd(&p, &q), Err(Error::Data(_))));
    }
}
