use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Axis, Context, Format};
use crate::config::{InstanceConfig, Stream};
use crate::diagnostics::{ingest_counts_file, tvd};
use crate::integrator::{
    calibrate, distinguishability_sweep, exact_e1, fidelity_sweep, jitter_convergence_sweep, noisy_ensemble,
    refine_modes_sweep, sampled_e1, write_estimates_csv, write_points_csv, write_sweeps_csv, EnergyEstimate,
    EnsembleSummary, Instance, JitterConfig, SweepPoint, SweepResult,
};
use crate::physics::BoundaryRule;
use crate::sampler::{
    enumerate_distribution, epsilon_for_fidelity, perturb_unitary, sample_indices, GramMatrix, OutputDistribution,
};
use crate::{seed, Result};

/// One line of the error budget.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetRow {
    pub row: String,
    /// `jitter`, or the deterministic boundary rule.
    pub variant: String,
    pub point: SweepPoint,
}

fn point(abscissa: f64, est: EnergyEstimate) -> SweepPoint {
    SweepPoint {
        abscissa,
        e1: est.e1,
        stderr: est.stderr,
        ensemble_std: 0.0,
        i0: est.i0,
        runs: 1,
        provenance: est.provenance,
    }
}

fn ensemble_point(abscissa: f64, summary: &EnsembleSummary, epsilon: f64, noise_seed: u64) -> SweepPoint {
    let mut provenance = summary.estimates[0].provenance.clone();
    provenance.epsilon = Some(epsilon);
    provenance.fidelity = Some(summary.mean_fidelity);
    provenance.noise_seed = Some(noise_seed);
    SweepPoint {
        abscissa,
        e1: summary.mean_e1,
        stderr: summary.stderr(),
        ensemble_std: summary.std_e1,
        i0: summary.mean_i0,
        runs: summary.runs,
        provenance,
    }
}

/// Noise strength for the first fidelity target, or the explicit ε.
fn budget_epsilon(cfg: &InstanceConfig, inst: &Instance) -> Result<f64> {
    if let Some(e) = cfg.noise.epsilon {
        return Ok(e);
    }
    let target = cfg.noise.fidelity_targets.first().copied().unwrap_or(1.0);
    let u = inst.encode(&inst.base_grid)?.unitary;
    epsilon_for_fidelity(&u, target, cfg.noise.calibration_realizations, inst.noise_seed)
}

/// Rows in order: fine-grid reference, ideal, overlaps only, fidelity only,
/// overlaps and fidelity, distinguishable. With jitter disabled every row is
/// emitted under both boundary rules. The abscissa is the row number.
pub fn error_budget(cfg: &InstanceConfig) -> Result<Vec<BudgetRow>> {
    let base = cfg.instance()?;
    let n = base.photons();
    let epsilon = budget_epsilon(cfg, &base)?;
    let variants: Vec<(String, JitterConfig)> = if cfg.jitter.enabled {
        vec![("jitter".into(), base.jitter)]
    } else {
        [BoundaryRule::Include, BoundaryRule::Exclude]
            .into_iter()
            .map(|r| (r.to_string(), JitterConfig::deterministic(r)))
            .collect()
    };
    let ideal = GramMatrix::indistinguishable(n);
    let overlaps = cfg.gram_matrix()?;
    let mut rows = Vec::new();
    for (variant, jitter) in variants {
        let inst = Instance { jitter, ..base.clone() };
        let grid = &inst.base_grid;
        let u = inst.encode(grid)?.unitary;
        let fine = grid.subdivide(cfg.calibration.subdivisions);
        let exact = |gram: &GramMatrix| -> Result<SweepPoint> {
            let dist = inst.distribution(&u, gram)?;
            Ok(point(0.0, inst.estimate(&dist, grid, &jitter)?))
        };
        let noisy = |gram: &GramMatrix| -> Result<SweepPoint> {
            let s = noisy_ensemble(&inst, &u, gram, epsilon, cfg.noise.realizations)?;
            Ok(ensemble_point(0.0, &s, epsilon, inst.noise_seed))
        };
        let entries = [
            ("reference", point(0.0, inst.ideal_estimate(&fine, &ideal, &jitter)?)),
            ("ideal", exact(&ideal)?),
            ("overlap", exact(&overlaps)?),
            ("fidelity", noisy(&ideal)?),
            ("overlap+fidelity", noisy(&overlaps)?),
            ("distinguishable", exact(&GramMatrix::distinguishable(n))?),
        ];
        for (k, (name, mut p)) in entries.into_iter().enumerate() {
            p.abscissa = (k + 1) as f64;
            rows.push(BudgetRow { row: name.into(), variant: variant.clone(), point: p });
        }
    }
    Ok(rows)
}

pub(super) fn cmd_error_budget(ctx: &Context) -> Result<Vec<PathBuf>> {
    let rows = error_budget(&ctx.config)?;
    println!("{:<18} {:<8} {:>10} {:>9} {:>8} {:>8} {:>8}", "row", "variant", "E1", "stderr", "I0", "s_mean", "F_U");
    for r in &rows {
        let p = &r.point;
        println!(
            "{:<18} {:<8} {:>10.5} {:>9.5} {:>8.5} {:>8.4} {:>8.4}",
            r.row,
            r.variant,
            p.e1,
            p.stderr,
            p.i0,
            p.provenance.mean_overlap.unwrap_or(f64::NAN),
            p.provenance.fidelity.unwrap_or(1.0)
        );
    }
    match ctx.format {
        Format::Csv => {
            let labelled: Vec<(String, SweepPoint)> =
                rows.iter().map(|r| (format!("{}/{}", r.row, r.variant), r.point.clone())).collect();
            Ok(vec![ctx.write_with("error_budget.csv", |w| write_points_csv(&labelled, w))?])
        }
        Format::Json => Ok(vec![ctx.write_json("error_budget.json", &rows)?]),
    }
}

fn fidelity_epsilons(cfg: &InstanceConfig, inst: &Instance) -> Result<Vec<f64>> {
    let u = inst.encode(&inst.base_grid)?.unitary;
    cfg.sweep
        .fidelities
        .iter()
        .map(|&f| epsilon_for_fidelity(&u, f, cfg.noise.calibration_realizations, inst.noise_seed))
        .collect()
}

pub(super) fn cmd_sweep(ctx: &Context, axis: Axis) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config;
    let inst = cfg.instance()?;
    let sweeps: Vec<SweepResult> = match axis {
        Axis::Modes => refine_modes_sweep(&cfg.sweep.modes, &inst)?,
        Axis::Jitter => jitter_convergence_sweep(&cfg.sweep.modes, &cfg.sweep.jitter_samples, cfg.sweep.jitter_repeats, &inst)?,
        Axis::S => vec![distinguishability_sweep(&cfg.sweep.overlaps, &inst)?],
        Axis::Fidelity => vec![fidelity_sweep(&fidelity_epsilons(cfg, &inst)?, cfg.noise.realizations, &inst)?],
    };
    for s in &sweeps {
        println!("{} [{}]", s.series, axis.name());
        for p in &s.points {
            println!("  {:>10.5} {:>10.5} ± {:.5} (sd {:.5})", p.abscissa, p.e1, p.stderr, p.ensemble_std);
        }
    }
    let stem = format!("sweep_{}", axis.name());
    let mut written = vec![ctx.write_json(&format!("{stem}.json"), &sweeps)?];
    if ctx.format == Format::Csv {
        written.insert(0, ctx.write_with(&format!("{stem}.csv"), |w| write_sweeps_csv(&sweeps, w))?);
    }
    Ok(written)
}

/// Ensemble-averaged collision-free distribution over noisy copies of `u`.
fn noisy_distribution(cfg: &InstanceConfig, inst: &Instance, gram: &GramMatrix, epsilon: f64) -> Result<OutputDistribution> {
    let u = inst.encode(&inst.base_grid)?.unitary;
    let ideal = inst.distribution(&u, gram)?;
    if epsilon == 0.0 {
        return Ok(ideal);
    }
    let r = cfg.noise.realizations;
    let mut acc = vec![0.0; ideal.len()];
    for k in 0..r {
        let (noisy, _) = perturb_unitary(&u, epsilon, seed::derive(inst.noise_seed, &[k as u64]))?;
        for (a, q) in acc.iter_mut().zip(inst.distribution(&noisy, gram)?.probs()) {
            *a += q / r as f64;
        }
    }
    let total: f64 = acc.iter().sum();
    ideal.with_probs(acc.iter().map(|q| q / total).collect(), "noisy-ensemble")
}

#[derive(Serialize)]
struct CompareReport {
    counts_file: String,
    total_counts: f64,
    tvd_ideal: f64,
    tvd_noisy: f64,
    epsilon: f64,
    e1_measured: EnergyEstimate,
    e1_ideal: EnergyEstimate,
}

#[derive(Serialize)]
struct Residual {
    pattern: String,
    measured: f64,
    uncertainty: f64,
    ideal: f64,
    noisy: f64,
    residual: f64,
    pull: Option<f64>,
}

pub(super) fn cmd_compare(ctx: &Context, counts: &Path) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config;
    let inst = cfg.instance()?;
    let data = ingest_counts_file(counts, cfg.modes, cfg.photons)?;
    let u = inst.encode(&inst.base_grid)?.unitary;
    let ideal = inst.distribution(&u, &GramMatrix::indistinguishable(cfg.photons))?;
    let epsilon = budget_epsilon(cfg, &inst)?;
    let noisy = noisy_distribution(cfg, &inst, &cfg.gram_matrix()?, epsilon)?;
    let report = CompareReport {
        counts_file: counts.display().to_string(),
        total_counts: data.total,
        tvd_ideal: tvd(&data.distribution, &ideal)?,
        tvd_noisy: tvd(&data.distribution, &noisy)?,
        epsilon,
        e1_measured: exact_e1(&data.distribution, &inst.base_grid, &inst.params, &inst.jitter)?,
        e1_ideal: exact_e1(&ideal, &inst.base_grid, &inst.params, &inst.jitter)?,
    };
    println!("TVD vs ideal      {:.5}", report.tvd_ideal);
    println!("TVD vs noisy      {:.5}", report.tvd_noisy);
    println!("E1 measured       {:.5} ± {:.5}", report.e1_measured.e1, report.e1_measured.stderr);
    println!("E1 ideal          {:.5} ± {:.5}", report.e1_ideal.e1, report.e1_ideal.stderr);
    let residuals: Vec<Residual> = data
        .distribution
        .iter()
        .zip(&data.uncertainty)
        .zip(ideal.probs().iter().zip(noisy.probs()))
        .map(|(((p, q), &s), (&qi, &qn))| Residual {
            pattern: p.to_string(),
            measured: q,
            uncertainty: s,
            ideal: qi,
            noisy: qn,
            residual: q - qi,
            pull: (s > 0.0).then(|| (q - qi) / s),
        })
        .collect();
    let mut written = vec![ctx.write_json("compare.json", &report)?];
    match ctx.format {
        Format::Csv => written.push(ctx.write_with("compare_residuals.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            for r in &residuals {
                c.serialize(r)?;
            }
            c.flush()?;
            Ok(())
        })?),
        Format::Json => written.push(ctx.write_json("compare_residuals.json", &residuals)?),
    }
    Ok(written)
}

/// Configured distribution: overlaps from the config and, when `noise.epsilon`
/// is set, one noisy interferometer drawn from the noise stream.
fn configured_distribution(cfg: &InstanceConfig, inst: &Instance) -> Result<OutputDistribution> {
    let mut u = inst.encode(&inst.base_grid)?.unitary;
    if let Some(e) = cfg.noise.epsilon {
        u = perturb_unitary(&u, e, inst.noise_seed)?.0;
    }
    inst.distribution(&u, &cfg.gram_matrix()?)
}

pub(super) fn cmd_sample(ctx: &Context, count: usize) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config;
    let inst = cfg.instance()?;
    let dist = configured_distribution(cfg, &inst)?;
    let sample_seed = cfg.stream_seed(Stream::Sampling);
    let indices = sample_indices(&dist, count, sample_seed);
    let mut tally = vec![0u64; dist.len()];
    for &i in &indices {
        tally[i] += 1;
    }
    let patterns: Vec<_> = indices.iter().map(|&i| dist.patterns()[i].clone()).collect();
    let mut est = sampled_e1(&patterns, &inst.base_grid, &inst.params, &inst.jitter)?;
    est.provenance.sample_seed = Some(sample_seed);
    est.provenance.epsilon = cfg.noise.epsilon;
    est.provenance.noise_seed = cfg.noise.epsilon.map(|_| inst.noise_seed);
    est.provenance.mean_overlap = dist.meta().gram.as_ref().map(GramMatrix::mean_overlap);
    est.provenance.gram = dist.meta().gram.clone();
    est.provenance.unitary_fingerprint = dist.meta().unitary_fingerprint.clone();
    println!("E1 from {count} samples: {:.5} ± {:.5} (I0 {:.5})", est.e1, est.stderr, est.i0);
    let counts = ctx.write_with("samples.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["pattern", "count"])?;
        for (p, &k) in dist.patterns().iter().zip(&tally) {
            if k > 0 {
                c.write_record([p.to_string(), k.to_string()])?;
            }
        }
        c.flush()?;
        Ok(())
    })?;
    let estimate = match ctx.format {
        Format::Csv => ctx.write_with("sample_estimate.csv", |w| write_estimates_csv(&[("sampled".into(), est)], w))?,
        Format::Json => ctx.write_json("sample_estimate.json", &est)?,
    };
    Ok(vec![counts, estimate])
}

#[derive(Serialize)]
struct EncodingFile<'a> {
    grid: &'a crate::physics::SpatialGrid,
    orbitals: &'a [usize],
    raw_deviation: f64,
    unitarity_defect: f64,
    fingerprint: String,
    unitary: &'a crate::linalg::UnitaryMatrix,
}

pub(super) fn cmd_encode(ctx: &Context) -> Result<Vec<PathBuf>> {
    let inst = ctx.config.instance()?;
    let enc = inst.encode(&inst.base_grid)?;
    println!(
        "{} modes, half extent {:.6}, raw deviation {:.3e}, defect {:.3e}",
        inst.base_grid.len(),
        inst.base_grid.half_extent(),
        enc.raw_deviation,
        enc.unitary.unitarity_defect()
    );
    match ctx.format {
        Format::Csv => Ok(vec![ctx.write_with("encoding.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["row", "col", "re", "im"])?;
            let u = &enc.unitary;
            for i in 0..u.dim() {
                for j in 0..u.dim() {
                    let z = u.get(i, j);
                    c.write_record([i.to_string(), j.to_string(), z.re.to_string(), z.im.to_string()])?;
                }
            }
            c.flush()?;
            Ok(())
        })?]),
        Format::Json => Ok(vec![ctx.write_json(
            "encoding.json",
            &EncodingFile {
                grid: &inst.base_grid,
                orbitals: inst.orbitals.indices(),
                raw_deviation: enc.raw_deviation,
                unitarity_defect: enc.unitary.unitarity_defect(),
                fingerprint: enc.unitary.fingerprint(),
                unitary: &enc.unitary,
            },
        )?]),
    }
}

pub(super) fn cmd_distribution(ctx: &Context, collisions: bool) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config;
    let inst = cfg.instance()?;
    let dist = if collisions {
        let u = inst.encode(&inst.base_grid)?.unitary;
        enumerate_distribution(&u, &inst.input(u.dim())?, &cfg.gram_matrix()?, false)?
    } else {
        configured_distribution(cfg, &inst)?
    };
    println!("{} patterns, postselection mass {:.6}", dist.len(), dist.meta().postselection_mass);
    match ctx.format {
        Format::Csv => Ok(vec![ctx.write_with("distribution.csv", |w| dist.write_csv(w))?]),
        Format::Json => {
            let path = ctx.path("distribution.json");
            ctx.write_with("distribution.json", |w| {
                use std::io::Write;
                writeln!(w, "{}", dist.to_json()?)?;
                Ok(())
            })?;
            Ok(vec![path])
        }
    }
}

pub(super) fn cmd_calibrate(ctx: &Context) -> Result<Vec<PathBuf>> {
    let cfg = &ctx.config;
    let cal = &cfg.calibration;
    let jitter = cfg.jitter_config();
    let base_jitter = JitterConfig { samples: cal.base_jitter_samples, ..jitter };
    let report = calibrate(
        &cfg.orbital_set()?,
        cfg.modes,
        &cal.extents(),
        cfg.hard_shell_radius,
        cal.subdivisions,
        if jitter.enabled { &base_jitter } else { &jitter },
        &jitter,
        &cal.targets(),
    )?;
    for p in &report.points {
        println!(
            "a = {:.4}  C = {:.5}  base {:.5}  reference {:.5}  gap {:+.4}  {}",
            p.half_extent,
            p.coupling,
            p.base_e1,
            p.reference_e1,
            p.gap,
            if p.passes { "pass" } else { "-" }
        );
    }
    let b = &report.best;
    println!(
        "best: a = {:.4}, C = {:.5} ({})",
        b.half_extent,
        b.coupling,
        if b.passes { "within tolerance" } else { "closest fit, outside tolerance" }
    );
    let mut calibrated = cfg.clone();
    calibrated.grid.half_extent = Some(b.half_extent);
    calibrated.coupling = b.coupling;
    let mut written = vec![ctx.write_json("calibration.json", &report)?];
    if ctx.format == Format::Csv {
        written.push(ctx.write_with("calibration.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            for p in &report.points {
                c.serialize(p)?;
            }
            c.flush()?;
            Ok(())
        })?);
    }
    written.push(ctx.write_with("calibrated.toml", |w| {
        use std::io::Write;
        w.write_all(calibrated.to_toml()?.as_bytes())?;
        Ok(())
    })?);
    Ok(written)
}
