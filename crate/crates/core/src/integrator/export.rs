use std::io::Write;

use serde::Serialize;

use super::{EnergyEstimate, Provenance, SweepPoint, SweepResult};
use crate::Result;

/// One CSV row: the estimate followed by every provenance field.
#[derive(Serialize)]
struct Row<'a> {
    label: &'a str,
    abscissa: Option<f64>,
    e1: f64,
    stderr: f64,
    ensemble_std: Option<f64>,
    i0: f64,
    runs: usize,
    samples: Option<usize>,
    estimator: &'a str,
    modes: usize,
    photons: usize,
    grid_half_extent: f64,
    grid_spacing: f64,
    coupling: Option<f64>,
    hard_shell_radius: Option<f64>,
    mean_overlap: Option<f64>,
    gram: Option<String>,
    unitary_fingerprint: Option<&'a str>,
    epsilon: Option<f64>,
    fidelity: Option<f64>,
    noise_seed: Option<u64>,
    sample_seed: Option<u64>,
    jitter_enabled: bool,
    jitter_samples: usize,
    jitter_seed: u64,
    boundary_rule: String,
}

impl<'a> Row<'a> {
    fn new(label: &'a str, p: &'a Provenance) -> Self {
        Row {
            label,
            abscissa: None,
            e1: 0.0,
            stderr: 0.0,
            ensemble_std: None,
            i0: 0.0,
            runs: 1,
            samples: None,
            estimator: &p.estimator,
            modes: p.modes,
            photons: p.photons,
            grid_half_extent: p.grid_half_extent,
            grid_spacing: p.grid_spacing,
            coupling: p.coupling,
            hard_shell_radius: p.hard_shell_radius,
            mean_overlap: p.mean_overlap,
            gram: p.gram.as_ref().map(|g| serde_json::to_string(g).expect("gram serializes")),
            unitary_fingerprint: p.unitary_fingerprint.as_deref(),
            epsilon: p.epsilon,
            fidelity: p.fidelity,
            noise_seed: p.noise_seed,
            sample_seed: p.sample_seed,
            jitter_enabled: p.jitter.enabled,
            jitter_samples: p.jitter.samples,
            jitter_seed: p.jitter.seed,
            boundary_rule: p.jitter.boundary_rule.to_string(),
        }
    }

    fn point(label: &'a str, pt: &'a SweepPoint) -> Self {
        Row {
            abscissa: Some(pt.abscissa),
            e1: pt.e1,
            stderr: pt.stderr,
            ensemble_std: Some(pt.ensemble_std),
            i0: pt.i0,
            runs: pt.runs,
            ..Row::new(label, &pt.provenance)
        }
    }

    fn estimate(label: &'a str, e: &'a EnergyEstimate) -> Self {
        Row { e1: e.e1, stderr: e.stderr, i0: e.i0, samples: Some(e.samples), ..Row::new(label, &e.provenance) }
    }
}

/// Labelled estimates, one CSV row each.
pub fn write_estimates_csv<W: Write>(rows: &[(String, EnergyEstimate)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (label, e) in rows {
        w.serialize(Row::estimate(label, e))?;
    }
    w.flush()?;
    Ok(())
}

/// Labelled sweep points, one CSV row each.
pub fn write_points_csv<W: Write>(rows: &[(String, SweepPoint)], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for (label, p) in rows {
        w.serialize(Row::point(label, p))?;
    }
    w.flush()?;
    Ok(())
}

/// All series of a sweep in one CSV, labelled by series name.
pub fn write_sweeps_csv<W: Write>(sweeps: &[SweepResult], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for s in sweeps {
        for p in &s.points {
            w.serialize(Row::point(&s.series, p))?;
        }
    }
    w.flush()?;
    Ok(())
}
