use itertools::Itertools;
use num_complex::Complex64;

use super::{GramMatrix, OccupationPattern};
use crate::linalg::{permanent, ComplexMatrix, UnitaryMatrix};
use crate::{Error, Result};

/// Largest photon number for the double-permutation distinguishability sum.
pub const MAX_PARTIAL_PHOTONS: usize = 6;

/// The `n×n` transition matrix for `mu_in → mu_out`: row `a` belongs to the
/// `a`-th detected photon (output modes repeated by occupancy), column `b` to
/// the `b`-th injected photon (input modes repeated by occupancy).
pub fn submatrix(u: &UnitaryMatrix, mu_in: &OccupationPattern, mu_out: &OccupationPattern) -> Result<ComplexMatrix> {
    check_patterns(u, mu_in, mu_out)?;
    let ins = mu_in.occupied();
    let outs = mu_out.occupied();
    ComplexMatrix::from_fn(outs.len(), ins.len(), |a, b| u.get(ins[b], outs[a]))
}

fn check_patterns(u: &UnitaryMatrix, mu_in: &OccupationPattern, mu_out: &OccupationPattern) -> Result<()> {
    let m = u.dim();
    if mu_in.modes() != m || mu_out.modes() != m {
        return Err(Error::Pattern(format!(
            "patterns have {} and {} modes, unitary has {m}",
            mu_in.modes(),
            mu_out.modes()
        )));
    }
    if mu_in.total() != mu_out.total() {
        return Err(Error::Pattern(format!(
            "photon number mismatch: {} in, {} out",
            mu_in.total(),
            mu_out.total()
        )));
    }
    if mu_in.total() == 0 {
        return Err(Error::Pattern("patterns carry no photons".into()));
    }
    Ok(())
}

/// `|Perm(M)|² / (∏ μ_out! ∏ μ_in!)` for indistinguishable photons.
pub fn output_probability(u: &UnitaryMatrix, mu_in: &OccupationPattern, mu_out: &OccupationPattern) -> Result<f64> {
    let m = submatrix(u, mu_in, mu_out)?;
    Ok(permanent(&m)?.norm_sqr() / (mu_out.factorial_product() * mu_in.factorial_product()))
}

/// Output probability for partially distinguishable photons with real
/// overlaps `S`:
///
/// `P = (∏ μ_out! ∏ μ_in!)⁻¹ Σ_{σ,ρ ∈ S_n} ∏_a M[a][σ(a)] M*[a][ρ(a)] S[ρ(a)][σ(a)]`.
///
/// `S` all-ones gives `|Perm M|²`; `S = I` gives `Perm(|M|²)`.
pub fn output_probability_partial(
    u: &UnitaryMatrix,
    mu_in: &OccupationPattern,
    mu_out: &OccupationPattern,
    gram: &GramMatrix,
) -> Result<f64> {
    let m = submatrix(u, mu_in, mu_out)?;
    let n = m.rows();
    if gram.dim() != n {
        return Err(Error::Model(format!("Gram matrix is {}x{}, pattern has {n} photons", gram.dim(), gram.dim())));
    }
    if n > MAX_PARTIAL_PHOTONS {
        return Err(Error::Size { size: n, limit: MAX_PARTIAL_PHOTONS });
    }
    Ok(partial_sum(&m, gram) / (mu_out.factorial_product() * mu_in.factorial_product()))
}

pub(crate) fn partial_sum(m: &ComplexMatrix, gram: &GramMatrix) -> f64 {
    let n = m.rows();
    let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
    // Amplitude of each permutation, computed once.
    let amps: Vec<Complex64> = perms
        .iter()
        .map(|p| p.iter().enumerate().fold(Complex64::new(1.0, 0.0), |acc, (a, &b)| acc * m.get(a, b)))
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    for (s, sigma) in perms.iter().enumerate() {
        if amps[s] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (r, rho) in perms.iter().enumerate() {
            let overlap: f64 = (0..n).map(|a| gram.get(rho[a], sigma[a])).product();
            if overlap != 0.0 {
                total += amps[s] * amps[r].conj() * overlap;
            }
        }
    }
    total.re
}
