//! Goodness of fit of the pattern sampler.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use bosonmc::config::InstanceConfig;
use bosonmc::sampler::{sample_indices, GramMatrix};

#[test]
fn million_samples_pass_chi_square() {
    let inst = InstanceConfig::default().instance().unwrap();
    let enc = inst.encode(&inst.base_grid).unwrap();
    let dist = inst.distribution(&enc.unitary, &GramMatrix::indistinguishable(3)).unwrap();
    let n = 1_000_000;
    let mut observed = vec![0u64; dist.len()];
    for i in sample_indices(&dist, n, 99) {
        observed[i] += 1;
    }

    // Cells expecting fewer than five hits are pooled.
    let (mut stat, mut cells) = (0.0, 0usize);
    let (mut pooled_obs, mut pooled_exp) = (0.0, 0.0);
    for (&o, &p) in observed.iter().zip(dist.probs()) {
        let e = p * n as f64;
        if e < 5.0 {
            pooled_obs += o as f64;
            pooled_exp += e;
        } else {
            stat += (o as f64 - e).powi(2) / e;
            cells += 1;
        }
    }
    if pooled_exp > 0.0 {
        stat += (pooled_obs - pooled_exp).powi(2) / pooled_exp;
        cells += 1;
    }
    let p_value = 1.0 - ChiSquared::new((cells - 1) as f64).unwrap().cdf(stat);
    assert!(p_value > 1e-3, "chi2 = {stat} on {} dof, p = {p_value}", cells - 1);
}
