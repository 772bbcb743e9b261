use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use crate::sampler::{collision_free_support, DistributionMeta, OccupationPattern, OutputDistribution};
use crate::{Error, Result};

/// Measured detection counts normalized over the collision-free support.
#[derive(Debug, Clone, PartialEq)]
pub struct CountData {
    pub distribution: OutputDistribution,
    /// Efficiency-corrected counts per support pattern.
    pub counts: Vec<f64>,
    /// Poisson standard error of each probability,
    /// `√raw · correction / total`.
    pub uncertainty: Vec<f64>,
    pub total: f64,
}

impl CountData {
    /// CSV with header `pattern,probability,uncertainty`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["pattern", "probability", "uncertainty"])?;
        for ((p, q), s) in self.distribution.iter().zip(&self.uncertainty) {
            w.write_record([p.to_string(), q.to_string(), s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub fn ingest_counts_file(path: &Path, modes: usize, photons: usize) -> Result<CountData> {
    let file = std::fs::File::open(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    ingest_counts(file, modes, photons)
}

/// Reads `pattern,count[,efficiency_correction]` rows. Patterns absent from
/// the file get zero counts. Errors name the offending line.
pub fn ingest_counts<R: Read>(reader: R, modes: usize, photons: usize) -> Result<CountData> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(|e| Error::Data(format!("count file header: {e}")))?.clone();
    let column = |name: &str| headers.iter().position(|h| h == name);
    let (pc, cc) = match (column("pattern"), column("count")) {
        (Some(p), Some(c)) => (p, c),
        _ => return Err(Error::Data(format!("count file header must contain pattern,count; got {:?}", headers.iter().collect::<Vec<_>>()))),
    };
    let ec = column("efficiency_correction");

    let support = collision_free_support(modes, photons);
    let index: HashMap<&OccupationPattern, usize> = support.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let mut counts = vec![0.0; support.len()];
    let mut variance = vec![0.0; support.len()];
    let mut seen = vec![false; support.len()];

    for (row, record) in rdr.records().enumerate() {
        let line = row + 2;
        let record = record.map_err(|e| Error::Data(format!("line {line}: {e}")))?;
        let field = |k: usize| record.get(k).unwrap_or("");
        let text = field(pc);
        let pattern: OccupationPattern =
            text.parse().map_err(|_| Error::Data(format!("line {line}: malformed pattern {text:?}")))?;
        if pattern.modes() != modes {
            return Err(Error::Data(format!("line {line}: pattern {text} has {} modes, expected {modes}", pattern.modes())));
        }
        if !pattern.is_collision_free() {
            return Err(Error::Data(format!("line {line}: pattern {text} has a collision")));
        }
        let &i = index
            .get(&pattern)
            .ok_or_else(|| Error::Data(format!("line {line}: pattern {text} does not carry {photons} photons")))?;
        if seen[i] {
            return Err(Error::Data(format!("line {line}: duplicate pattern {text}")));
        }
        seen[i] = true;
        let raw = parse_nonnegative(field(cc), "count", line)?;
        let corr = match ec {
            Some(k) if !field(k).is_empty() => parse_nonnegative(field(k), "efficiency_correction", line)?,
            _ => 1.0,
        };
        counts[i] = raw * corr;
        variance[i] = raw * corr * corr;
    }

    let total: f64 = counts.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Data("count file has no positive counts".into()));
    }
    let meta = DistributionMeta {
        modes,
        photons,
        unitary_fingerprint: None,
        input: None,
        gram: None,
        collision_free: true,
        postselection_mass: 1.0,
        source: "counts".into(),
    };
    let distribution = OutputDistribution::new(support, counts.iter().map(|c| c / total).collect(), meta)?;
    let uncertainty = variance.iter().map(|v| v.sqrt() / total).collect();
    Ok(CountData { distribution, counts, uncertainty, total })
}

fn parse_nonnegative(text: &str, what: &str, line: usize) -> Result<f64> {
    let v: f64 = text.parse().map_err(|_| Error::Data(format!("line {line}: {what} {text:?} is not a number")))?;
    if !v.is_finite() || v < 0.0 {
        return Err(Error::Data(format!("line {line}: {what} must be finite and non-negative, got {text}")));
    }
    Ok(v)
}
