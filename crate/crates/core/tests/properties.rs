//! Property tests for the invariants of each module.

use itertools::Itertools;
use num_complex::Complex64;
use proptest::prelude::*;

use bosonmc::config::{GramSpec, InstanceConfig};
use bosonmc::diagnostics::{coarse_grain, k_marginal, tvd, BinPartition};
use bosonmc::integrator::{exact_e1, jittered_evaluate, JitterConfig, Perturbation};
use bosonmc::linalg::{amplitude_fidelity, haar_random, nearest_unitary, permanent, permanent_with, ComplexMatrix, PermanentMethod, UnitaryMatrix};
use bosonmc::physics::{
    encode_unitary, hard_shell, orbital, pattern_to_configuration, snap_to_pattern, BoundaryRule, EfimovParams, OrbitalSet,
    ParticleConfiguration, SpatialGrid,
};
use bosonmc::sampler::{
    collision_free_support, enumerate_distribution, output_probability, output_probability_partial, DistributionMeta,
    GramMatrix, OccupationPattern, OutputDistribution,
};

fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn square(max: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(complex(), n * n).prop_map(move |v| ComplexMatrix::from_vec(n, n, v).unwrap())
    })
}

fn permutation_sum(a: &ComplexMatrix) -> Complex64 {
    let n = a.rows();
    (0..n)
        .permutations(n)
        .map(|s| s.iter().enumerate().map(|(i, &j)| a.get(i, j)).product::<Complex64>())
        .sum()
}

fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1e-300) || (a - b).norm() <= 1e-300
}

/// Gram matrix of `n` random real unit vectors: always PSD.
fn gram(n: usize) -> impl Strategy<Value = GramMatrix> {
    prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 3), n).prop_filter_map("zero vector", move |vs| {
        let norms: Vec<f64> = vs.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
        if norms.iter().any(|&r| r < 1e-3) {
            return None;
        }
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i == j {
                            1.0
                        } else {
                            vs[i].iter().zip(&vs[j]).map(|(a, b)| a * b).sum::<f64>() / (norms[i] * norms[j])
                        }
                    })
                    .collect()
            })
            .collect();
        GramMatrix::from_rows(&rows).ok()
    })
}

fn meta(m: usize, n: usize) -> DistributionMeta {
    DistributionMeta {
        modes: m,
        photons: n,
        unitary_fingerprint: None,
        input: None,
        gram: None,
        collision_free: true,
        postselection_mass: 1.0,
        source: "test".into(),
    }
}

fn random_distribution(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, len).prop_filter_map("no mass", |w| {
        let s: f64 = w.iter().sum();
        (s > 0.0).then(|| w.iter().map(|x| x / s).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn permanent_matches_oracle(a in square(5)) {
        let oracle = permutation_sum(&a);
        prop_assert!(close(permanent(&a).unwrap(), oracle, 1e-12));
        prop_assert!(close(permanent_with(&a, PermanentMethod::Glynn).unwrap(), oracle, 1e-12));
    }

    #[test]
    fn permanent_is_linear_in_each_row(a in square(4), c in complex(), row in 0usize..4) {
        let n = a.rows();
        let row = row % n;
        let scaled = ComplexMatrix::from_fn(n, n, |i, j| if i == row { c * a.get(i, j) } else { a.get(i, j) }).unwrap();
        let expect = c * permanent(&a).unwrap();
        prop_assert!(close(permanent(&scaled).unwrap(), expect, 1e-12));
    }

    #[test]
    fn permanent_invariant_under_row_and_column_permutation(
        a in square(5),
        rows in Just(()).prop_perturb(|_, mut rng| rng.random::<u64>()),
    ) {
        let n = a.rows();
        let perms: Vec<Vec<usize>> = (0..n).permutations(n).collect();
        let p = &perms[(rows as usize) % perms.len()];
        let q = &perms[(rows as usize / 7) % perms.len()];
        let b = ComplexMatrix::from_fn(n, n, |i, j| a.get(p[i], q[j])).unwrap();
        prop_assert!(close(permanent(&b).unwrap(), permanent(&a).unwrap(), 1e-12));
    }

    #[test]
    fn nearest_unitary_is_idempotent(a in square(6)) {
        if let Ok(u) = nearest_unitary(&a) {
            prop_assert!(u.unitarity_defect() <= 1e-10);
            let v = nearest_unitary(u.matrix()).unwrap();
            prop_assert!(v.matrix().sub(u.matrix()).unwrap().max_abs() <= 1e-10);
        }
    }

    #[test]
    fn fidelity_is_symmetric(m in 2usize..10, s1 in any::<u64>(), s2 in any::<u64>()) {
        let (u, v) = (haar_random(m, s1).unwrap(), haar_random(m, s2).unwrap());
        let f = amplitude_fidelity(&u, &v).unwrap();
        prop_assert!((f - amplitude_fidelity(&v, &u).unwrap()).abs() <= 1e-12);
        prop_assert!(f > 0.0 && f <= 1.0 + 1e-9);
    }

    #[test]
    fn full_distribution_normalized(m in 2usize..8, n in 1usize..4, s in any::<u64>(), g in gram(3)) {
        prop_assume!(n <= m);
        let u = haar_random(m, s).unwrap();
        let input = OccupationPattern::first_modes(m, n).unwrap();
        let g = if n == 3 { g } else { GramMatrix::homogeneous(n, 0.5).unwrap() };
        let d = enumerate_distribution(&u, &input, &g, false).unwrap();
        let sum: f64 = d.probs().iter().sum();
        prop_assert!((sum - 1.0).abs() <= 1e-10);
        prop_assert!(d.probs().iter().all(|&p| (0.0..=1.0).contains(&p)));
    }

    #[test]
    fn indistinguishable_limit_matches_permanent(m in 3usize..9, s in any::<u64>()) {
        let u = haar_random(m, s).unwrap();
        let input = OccupationPattern::first_modes(m, 3).unwrap();
        let ones = GramMatrix::indistinguishable(3);
        for p in collision_free_support(m, 3) {
            let a = output_probability(&u, &input, &p).unwrap();
            let b = output_probability_partial(&u, &input, &p, &ones).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn probabilities_invariant_under_output_relabeling(m in 3usize..7, s in any::<u64>(), g in gram(3), shift in 1usize..6) {
        let u = haar_random(m, s).unwrap();
        let pi: Vec<usize> = (0..m).map(|k| (k + shift) % m).collect();
        let mut entries = vec![Complex64::new(0.0, 0.0); m * m];
        for i in 0..m {
            for j in 0..m {
                entries[i * m + pi[j]] = u.get(i, j);
            }
        }
        let v = UnitaryMatrix::new(ComplexMatrix::from_vec(m, m, entries).unwrap()).unwrap();
        let relabel = |p: &OccupationPattern| {
            let mut c = vec![0u8; m];
            for (k, &n) in p.counts().iter().enumerate() {
                c[pi[k]] = n;
            }
            OccupationPattern::new(c).unwrap()
        };
        let input = OccupationPattern::first_modes(m, 3).unwrap();
        for out in collision_free_support(m, 3) {
            let a = output_probability_partial(&u, &input, &out, &g).unwrap();
            let b = output_probability_partial(&v, &input, &relabel(&out), &g).unwrap();
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn pattern_text_round_trips(counts in prop::collection::vec(0u8..10, 1..20)) {
        let p = OccupationPattern::new(counts).unwrap();
        prop_assert_eq!(p.to_string().parse::<OccupationPattern>().unwrap(), p);
    }

    #[test]
    fn orbital_parity(i in 0usize..=5, x in -6.0f64..6.0) {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        prop_assert!((orbital(i, -x) - sign * orbital(i, x)).abs() <= 1e-12);
    }

    #[test]
    fn potential_symmetries(x in prop::collection::vec(-5.0f64..5.0, 3), c in 0.0f64..3.0, t in -10.0f64..10.0) {
        let params = EfimovParams::new(c, 0.1).unwrap();
        prop_assume!(x.iter().tuple_combinations().any(|(a, b)| (a - b).abs() > 1e-3));
        let v = params.potential(&x).unwrap();
        prop_assert!(v < 0.0);
        for p in x.iter().copied().permutations(3) {
            prop_assert!((params.potential(&p).unwrap() - v).abs() <= 1e-12 * v.abs());
        }
        let shifted: Vec<f64> = x.iter().map(|a| a + t).collect();
        prop_assert!((params.potential(&shifted).unwrap() - v).abs() <= 1e-9 * v.abs());
    }

    #[test]
    fn hard_shell_symmetries(x in prop::collection::vec(-3.0f64..3.0, 3), d in 0.05f64..2.0, t in -5.0f64..5.0) {
        let conf = ParticleConfiguration::new(x.clone()).unwrap();
        let shifted = conf.shifted(t);
        for rule in [BoundaryRule::Include, BoundaryRule::Exclude] {
            let base = hard_shell(&conf, d, rule);
            for p in x.iter().copied().permutations(3) {
                prop_assert_eq!(hard_shell(&ParticleConfiguration::new(p).unwrap(), d, rule), base);
            }
            // Shifting can move a distance across the tolerance band only if it
            // sits right on the radius.
            let near = x.iter().tuple_combinations().any(|(a, b)| ((a - b).abs() - d).abs() < 1e-6);
            if !near {
                prop_assert_eq!(hard_shell(&shifted, d, rule), base);
            }
        }
        if hard_shell(&conf, d, BoundaryRule::Exclude) {
            prop_assert!(hard_shell(&conf, d, BoundaryRule::Include));
        }
    }

    #[test]
    fn snapping_inverts_pattern_mapping(modes in prop::sample::subsequence((0..12).collect::<Vec<_>>(), 3)) {
        let grid = SpatialGrid::uniform(12, 3.0).unwrap();
        let p = OccupationPattern::from_modes(12, &modes).unwrap();
        let conf = pattern_to_configuration(&p, &grid).unwrap();
        prop_assert_eq!(snap_to_pattern(&conf, &grid).unwrap(), p);
    }

    #[test]
    fn energy_is_negative(s in 0.0f64..=1.0, c in 0.0f64..2.0, rule in prop_oneof![Just(BoundaryRule::Include), Just(BoundaryRule::Exclude)]) {
        let grid = SpatialGrid::uniform(12, 3.0).unwrap();
        let u = encode_unitary(&OrbitalSet::default(), &grid).unwrap().unitary;
        let input = OccupationPattern::first_modes(12, 3).unwrap();
        let d = enumerate_distribution(&u, &input, &GramMatrix::homogeneous(3, s).unwrap(), true).unwrap();
        let params = EfimovParams::new(c, grid.spacing()).unwrap();
        let e = exact_e1(&d, &grid, &params, &JitterConfig::deterministic(rule)).unwrap();
        prop_assert!(e.e1 < 0.0 && e.e1.is_finite());
        prop_assert!(e.i0 > 0.0 && e.i0 <= 1.0 + 1e-12);
        prop_assert_eq!(e.stderr, 0.0);
    }

    #[test]
    fn marginals_reduce_consistently(m in 3usize..8, s in any::<u64>(), k in 1usize..=3, cf in any::<bool>()) {
        let u = haar_random(m, s).unwrap();
        let input = OccupationPattern::first_modes(m, 3).unwrap();
        let d = enumerate_distribution(&u, &input, &GramMatrix::indistinguishable(3), cf).unwrap();
        let all: Vec<usize> = (0..m).collect();
        let upper = k_marginal(&d, &all, k).unwrap();
        let reduced = upper.reduce(3, m).unwrap();
        let direct = k_marginal(&d, &all, k - 1).unwrap();
        prop_assert_eq!(&reduced.events, &direct.events);
        for (a, b) in reduced.table.iter().zip(&direct.table) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn tvd_is_a_metric(p in random_distribution(20), q in random_distribution(20), r in random_distribution(20)) {
        let support = collision_free_support(7, 3)[..20].to_vec();
        let mk = |v: Vec<f64>| OutputDistribution::new(support.clone(), v, meta(7, 3)).unwrap();
        let (p, q, r) = (mk(p), mk(q), mk(r));
        let pq = tvd(&p, &q).unwrap();
        prop_assert!((pq - tvd(&q, &p).unwrap()).abs() <= 1e-15);
        prop_assert!(tvd(&p, &p).unwrap() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&pq));
        prop_assert!(pq <= tvd(&p, &r).unwrap() + tvd(&r, &q).unwrap() + 1e-12);
    }

    #[test]
    fn coarse_graining_bound_holds(s in any::<u64>(), k in 1usize..30) {
        let u = haar_random(8, s).unwrap();
        let input = OccupationPattern::first_modes(8, 3).unwrap();
        let d = enumerate_distribution(&u, &input, &GramMatrix::indistinguishable(3), true).unwrap();
        let part = BinPartition::random(d.len(), k, s ^ 0x55).unwrap();
        let masses: f64 = part.masses(d.probs()).iter().sum();
        prop_assert!((masses - 1.0).abs() <= 1e-10);
        let cg = coarse_grain(&d, &part, 200, s).unwrap();
        prop_assert!(cg.tvd_actual <= cg.tvd_bound);
        prop_assert!(cg.tvd_estimated <= cg.tvd_bound);
    }
}

/// Random configurations that pass validation.
fn config() -> impl Strategy<Value = InstanceConfig> {
    (
        0.0f64..3.0,
        prop::option::of(2.0f64..5.0),
        prop::option::of(0.1f64..1.0),
        prop_oneof![
            (0.0f64..=1.0).prop_map(|s| GramSpec::Homogeneous { s }),
            prop::collection::vec(0.5f64..=1.0, 3).prop_map(|values| GramSpec::Visibilities { values }),
        ],
        any::<u64>(),
        any::<bool>(),
        1usize..5000,
        prop::option::of(0.0f64..0.5),
    )
        .prop_map(|(c, a, d, g, seed, jit, n, eps)| {
            let mut cfg = InstanceConfig::default();
            cfg.coupling = c;
            cfg.grid.half_extent = a;
            cfg.hard_shell_radius = d;
            cfg.gram = g;
            cfg.seed = seed;
            cfg.jitter.enabled = jit;
            cfg.jitter.samples = n;
            cfg.noise.epsilon = eps;
            cfg
        })
        .prop_filter("invalid configuration", |cfg| cfg.validate().is_ok())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn config_round_trips_through_toml(cfg in config()) {
        let text = cfg.to_toml().unwrap();
        prop_assert_eq!(InstanceConfig::from_toml(&text).unwrap(), cfg);
    }
}

/// `V(X) = Σ x_i`, never rejected.
struct Linear;

impl Perturbation for Linear {
    fn potential(&self, x: &[f64]) -> bosonmc::Result<f64> {
        Ok(x.iter().sum())
    }

    fn accepts(&self, _: &[f64], _: BoundaryRule) -> bool {
        true
    }
}

#[test]
fn jitter_of_linear_potential_converges_to_bin_centres() {
    let grid = SpatialGrid::uniform(12, 3.0).unwrap();
    let p = OccupationPattern::from_modes(12, &[0, 5, 11]).unwrap();
    let centre: f64 = [0, 5, 11].iter().map(|&j| grid.positions()[j]).sum();
    let deterministic = jittered_evaluate(&p, &grid, &Linear, &JitterConfig::deterministic(BoundaryRule::Include)).unwrap();
    assert!((deterministic.mean_v() - centre).abs() < 1e-12);
    let jittered = jittered_evaluate(&p, &grid, &Linear, &JitterConfig::jittered(10_000, 3)).unwrap();
    let n = jittered.draws as f64;
    let var = (jittered.sum_v2 / n - jittered.mean_v().powi(2)) * n / (n - 1.0);
    let stderr = (var / n).sqrt();
    assert_eq!(jittered.acceptance(), 1.0);
    assert!((jittered.mean_v() - centre).abs() <= 3.0 * stderr, "{} vs {centre} ± {stderr}", jittered.mean_v());
}

#[test]
fn estimates_reproduce_bit_for_bit() {
    let inst = InstanceConfig::default().instance().unwrap();
    let run = || inst.ideal_estimate(&inst.base_grid, &inst.gram, &inst.jitter).unwrap();
    let (a, b) = (run(), run());
    assert_eq!(a.e1.to_bits(), b.e1.to_bits());
    assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
    assert_eq!(a, b);
}
