//! Worked examples for each operation, checked against independent oracles.

use itertools::Itertools;
use num_complex::Complex64;

use bosonmc::config::InstanceConfig;
use bosonmc::diagnostics::{coarse_grain, ingest_counts, tvd, BinPartition};
use bosonmc::integrator::{
    distinguishability_sweep, exact_e1, fidelity_sweep, jitter_convergence_sweep, refine_modes_sweep, sampled_e1, Instance,
    JitterConfig,
};
use bosonmc::linalg::{amplitude_fidelity, gurvits_estimate, haar_random, nearest_unitary, permanent, ComplexMatrix};
use bosonmc::physics::{encode_unitary, orbital, pattern_to_configuration, OrbitalSet, SpatialGrid};
use bosonmc::sampler::{
    collision_free_support, mean_fidelity, output_probability_partial, perturb_unitary,
    sample_patterns, submatrix, GramMatrix, OccupationPattern, OutputDistribution,
};

fn instance() -> Instance {
    InstanceConfig::default().instance().unwrap()
}

fn ideal(inst: &Instance) -> OutputDistribution {
    let enc = inst.encode(&inst.base_grid).unwrap();
    inst.distribution(&enc.unitary, &GramMatrix::indistinguishable(3)).unwrap()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (mean, (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
}

// linalg

#[test]
fn gurvits_stderr_halves_with_four_times_the_samples() {
    let u = haar_random(6, 11).unwrap();
    let a = ComplexMatrix::from_fn(3, 3, |i, j| u.get(i, j)).unwrap();
    for seed in 0..5 {
        let small = gurvits_estimate(&a, 20_000, seed).unwrap().stderr;
        let large = gurvits_estimate(&a, 80_000, seed + 100).unwrap().stderr;
        let ratio = large / small;
        assert!((ratio - 0.5).abs() <= 0.1, "ratio {ratio}");
    }
}

#[test]
fn gurvits_mean_over_seeds_matches_permanent() {
    for s in 0..5 {
        let u = haar_random(5, s).unwrap();
        let a = ComplexMatrix::from_fn(3, 3, |i, j| u.get(i + 1, j + 2)).unwrap();
        let exact = permanent(&a).unwrap();
        let runs: Vec<_> = (0..50).map(|seed| gurvits_estimate(&a, 2_000, seed).unwrap()).collect();
        let mean: Complex64 = runs.iter().map(|r| r.estimate).sum::<Complex64>() / 50.0;
        let combined = (runs.iter().map(|r| r.stderr * r.stderr).sum::<f64>()).sqrt() / 50.0;
        assert!((mean - exact).norm() <= 4.0 * combined, "{mean} vs {exact} ± {combined}");
    }
}

#[test]
fn projection_moves_perturbed_unitary_closer() {
    let u = haar_random(8, 3).unwrap();
    let noise = haar_random(8, 4).unwrap();
    let a = ComplexMatrix::from_fn(8, 8, |i, j| u.get(i, j) + 0.01 * noise.get(i, j)).unwrap();
    let p = nearest_unitary(&a).unwrap();
    assert!(p.matrix().unitarity_defect() <= 1e-10);
    let before = a.sub(u.matrix()).unwrap().frobenius_norm();
    let after = p.matrix().sub(u.matrix()).unwrap().frobenius_norm();
    assert!(after < before, "{after} >= {before}");
}

#[test]
fn fidelity_decreases_along_noise_sweep() {
    let inst = instance();
    let u = inst.encode(&inst.base_grid).unwrap().unitary;
    let mut last = 1.0 + 1e-9;
    for eps in [0.01, 0.03, 0.1, 0.3] {
        let f = amplitude_fidelity(&u, &perturb_unitary(&u, eps, 7).unwrap().0).unwrap();
        assert!(f > 0.0 && f < 1.0 && f < last, "F({eps}) = {f}");
        last = f;
    }
}

// sampler

#[test]
fn submatrix_matches_hand_indexing() {
    let u = haar_random(7, 5).unwrap();
    let input = OccupationPattern::from_modes(7, &[0, 2, 5]).unwrap();
    let output = OccupationPattern::new(vec![0, 2, 0, 0, 1, 0, 0]).unwrap();
    let m = submatrix(&u, &input, &output).unwrap();
    let ins = [0, 2, 5];
    let outs = [1, 1, 4];
    for (a, &o) in outs.iter().enumerate() {
        for (b, &i) in ins.iter().enumerate() {
            assert_eq!(m.get(a, b), u.get(i, o));
        }
    }
}

#[test]
fn beamsplitter_dip_follows_overlap() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let bs = ComplexMatrix::from_real_rows(&[vec![h, h], vec![h, -h]]).unwrap();
    let bs = bosonmc::linalg::UnitaryMatrix::new(bs).unwrap();
    let p = OccupationPattern::new(vec![1, 1]).unwrap();
    for s in [0.0, 0.5, 1.0] {
        let got = output_probability_partial(&bs, &p, &p, &GramMatrix::homogeneous(2, s).unwrap()).unwrap();
        assert!((got - (1.0 - s * s) / 2.0).abs() <= 1e-12, "s = {s}: {got}");
    }
}

#[test]
fn distinguishable_probability_is_permanent_of_moduli() {
    let u = haar_random(6, 9).unwrap();
    let input = OccupationPattern::first_modes(6, 3).unwrap();
    let id = GramMatrix::distinguishable(3);
    for out in bosonmc::sampler::full_support(6, 3) {
        let m = submatrix(&u, &input, &out).unwrap();
        let moduli = m.map(|z| Complex64::new(z.norm_sqr(), 0.0));
        let oracle = permanent(&moduli).unwrap().re / out.factorial_product();
        let got = output_probability_partial(&u, &input, &out, &id).unwrap();
        assert!((got - oracle).abs() <= 1e-12);
    }
}

#[test]
fn mean_fidelity_is_non_increasing_in_noise() {
    let u = encode_unitary(&OrbitalSet::default(), &SpatialGrid::uniform(12, 3.0).unwrap()).unwrap().unitary;
    let fs: Vec<f64> = [0.0, 0.02, 0.05, 0.1, 0.2].iter().map(|&e| mean_fidelity(&u, e, 100, 1).unwrap()).collect();
    assert!((fs[0] - 1.0).abs() <= 1e-12);
    assert!(fs.windows(2).all(|w| w[1] <= w[0]), "{fs:?}");
}

#[test]
fn strong_noise_approaches_haar_baseline() {
    let u = encode_unitary(&OrbitalSet::default(), &SpatialGrid::uniform(12, 3.0).unwrap()).unwrap().unitary;
    let haar: Vec<f64> = (0..400).map(|s| amplitude_fidelity(&u, &haar_random(12, 10_000 + s).unwrap()).unwrap()).collect();
    let (baseline, sd) = mean_std(&haar);
    let noisy = mean_fidelity(&u, 20.0, 400, 2).unwrap();
    // Two independent 400-draw means.
    let tol = 4.0 * sd * (2.0f64 / 400.0).sqrt();
    assert!((noisy - baseline).abs() <= tol, "{noisy} vs {baseline} ± {tol}");
}

// physics

#[test]
fn second_orbital_is_normalized() {
    let n = 10_000;
    let h = 20.0 / n as f64;
    // Composite Simpson on [-10, 10].
    let sum: f64 = (0..=n)
        .map(|k| {
            let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
            w * orbital(2, -10.0 + k as f64 * h).powi(2)
        })
        .sum();
    assert!((sum * h / 3.0 - 1.0).abs() <= 1e-8);
}

#[test]
fn raw_rows_orthogonal_on_fine_grid() {
    let enc = encode_unitary(&OrbitalSet::default(), &SpatialGrid::uniform(48, 5.0).unwrap()).unwrap();
    let dot: f64 = enc.raw_rows[0].iter().zip(&enc.raw_rows[1]).map(|(a, b)| a * b).sum();
    assert!(dot.abs() <= 1e-6, "{dot}");
    assert!(enc.unitary.unitarity_defect() <= 1e-10);
}

/// Normalized overlap of orbitals `i` and `j` restricted to `[-l, l]`, by
/// composite Simpson.
fn truncated_overlap(i: usize, j: usize, l: f64) -> f64 {
    let n = 20_000;
    let h = 2.0 * l / n as f64;
    let simpson = |f: &dyn Fn(f64) -> f64| {
        (0..=n)
            .map(|k| {
                let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
                w * f(-l + k as f64 * h)
            })
            .sum::<f64>()
            * h
            / 3.0
    };
    let ij = simpson(&|x| orbital(i, x) * orbital(j, x));
    let ii = simpson(&|x| orbital(i, x).powi(2));
    let jj = simpson(&|x| orbital(j, x).powi(2));
    ij / (ii * jj).sqrt()
}

#[test]
fn raw_rows_converge_to_truncated_overlaps_under_refinement() {
    let base = SpatialGrid::covering(&OrbitalSet::default(), 12, 0.999).unwrap();
    let errs: Vec<f64> = (0..5)
        .map(|k| {
            let grid = base.refine(k);
            let enc = encode_unitary(&OrbitalSet::default(), &grid).unwrap();
            let l = grid.half_extent() + grid.spacing() / 2.0;
            let dot: f64 = enc.raw_rows[0].iter().zip(&enc.raw_rows[2]).map(|(a, b)| a * b).sum();
            (dot - truncated_overlap(0, 2, l)).abs()
        })
        .collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    assert!(errs[4] < errs[0] / 5.0, "{errs:?}");
}

#[test]
fn occupied_modes_map_to_grid_points() {
    let grid = SpatialGrid::uniform(12, 3.0).unwrap();
    let p: OccupationPattern = "100001000001".parse().unwrap();
    let x = pattern_to_configuration(&p, &grid).unwrap();
    let chi = grid.positions();
    assert_eq!(x.positions(), &[chi[0], chi[5], chi[11]]);
}

// integrator

#[test]
fn sampled_stderr_scales_as_inverse_root_n() {
    let inst = instance();
    let dist = ideal(&inst);
    let jitter = JitterConfig::jittered(20, 4);
    let errs: Vec<f64> = [10_000, 40_000, 160_000]
        .iter()
        .map(|&n| {
            let s = sample_patterns(&dist, n, 77 + n as u64);
            sampled_e1(&s, &inst.base_grid, &inst.params, &jitter).unwrap().stderr
        })
        .collect();
    for w in errs.windows(2) {
        let ratio = w[1] / w[0];
        assert!((ratio - 0.5).abs() <= 0.1, "{errs:?}");
    }
}

#[test]
fn overlap_sweep_hits_both_limits_and_is_monotone() {
    let inst = instance();
    let sweep = distinguishability_sweep(&[0.0, 0.25, 0.5, 0.75, 1.0], &inst).unwrap();
    let e = sweep.e1();
    let enc = inst.encode(&inst.base_grid).unwrap();
    let limit = |g: GramMatrix| {
        let d = inst.distribution(&enc.unitary, &g).unwrap();
        exact_e1(&d, &inst.base_grid, &inst.params, &inst.jitter).unwrap().e1
    };
    assert_eq!(e[0], limit(GramMatrix::distinguishable(3)));
    assert_eq!(e[4], limit(GramMatrix::indistinguishable(3)));
    assert!(e.windows(2).all(|w| w[1] < w[0]), "{e:?}");
}

#[test]
fn fidelity_sweep_spread_vanishes_only_without_noise() {
    let inst = instance();
    let sweep = fidelity_sweep(&[0.0, 0.05, 0.15], 10, &inst).unwrap();
    let ideal_e1 = exact_e1(&ideal(&inst), &inst.base_grid, &inst.params, &inst.jitter).unwrap().e1;
    assert_eq!(sweep.points[0].e1, ideal_e1);
    assert_eq!(sweep.points[0].ensemble_std, 0.0);
    assert!(sweep.points[1..].iter().all(|p| p.ensemble_std > 0.0));
    assert!(sweep.points[2].e1 > sweep.points[0].e1);
}

#[test]
fn jitter_curves_agree_at_finest_grid() {
    let inst = instance();
    let modes = [12, 23, 34];
    let curves = jitter_convergence_sweep(&modes, &[100, 1000], 8, &inst).unwrap();
    let last: Vec<_> = curves.iter().map(|c| c.points.last().unwrap().clone()).collect();
    let sd = last.iter().map(|p| p.ensemble_std).fold(0.0, f64::max);
    assert!((last[0].e1 - last[1].e1).abs() <= sd, "{last:?}");
    assert!(curves[1].points[0].ensemble_std < curves[0].points[0].ensemble_std);
}

#[test]
fn jittered_energy_dips_before_settling() {
    let mut cfg = InstanceConfig::default();
    cfg.grid.half_extent = Some(3.45);
    cfg.coupling = 0.99466837258891;
    let inst = cfg.instance().unwrap();
    let modes = [12, 23, 34, 45, 56];
    let curves = refine_modes_sweep(&modes, &inst).unwrap();
    let jit = curves.iter().find(|c| c.series == "jitter").unwrap().e1();
    let converged = jit[jit.len() - 1];
    let lowest = jit[..2].iter().copied().fold(f64::INFINITY, f64::min);
    assert!(lowest < converged, "{jit:?}");
}

// diagnostics

#[test]
fn single_bin_flattens_to_uniform() {
    let dist = ideal(&instance());
    let cg = coarse_grain(&dist, &BinPartition::single_bin(dist.len()).unwrap(), 500, 1).unwrap();
    let uniform = dist.with_probs(vec![1.0 / 220.0; 220], "uniform").unwrap();
    assert!((cg.tvd_actual - tvd(&dist, &uniform).unwrap()).abs() <= 1e-12);
}

#[test]
fn uniform_counts_give_uniform_distribution() {
    let mut text = String::from("pattern,count\n");
    for p in collision_free_support(12, 3) {
        text.push_str(&format!("{p},37\n"));
    }
    let data = ingest_counts(text.as_bytes(), 12, 3).unwrap();
    assert!(data.distribution.probs().iter().all(|&p| (p - 1.0 / 220.0).abs() <= 1e-15));
}

#[test]
fn synthetic_counts_sit_at_the_multinomial_floor() {
    let dist = ideal(&instance());
    let n = 250_000;
    let samples = sample_patterns(&dist, n, 2024);
    let counts = samples.iter().counts();
    let mut text = String::from("pattern,count\n");
    for p in dist.patterns() {
        text.push_str(&format!("{p},{}\n", counts.get(p).copied().unwrap_or(0)));
    }
    let data = ingest_counts(text.as_bytes(), 12, 3).unwrap();
    let d = tvd(&data.distribution, &dist).unwrap();
    // E|X − Np| ≈ √(2Np(1−p)/π) for each multinomial cell.
    let floor: f64 =
        0.5 * dist.probs().iter().map(|&p| (2.0 * p * (1.0 - p) / (std::f64::consts::PI * n as f64)).sqrt()).sum::<f64>();
    assert!(d < 0.173);
    assert!((d / floor - 1.0).abs() <= 0.2, "tvd {d}, floor {floor}");
}
