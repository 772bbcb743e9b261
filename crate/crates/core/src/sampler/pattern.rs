use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Photon count per mode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct OccupationPattern {
    counts: Vec<u8>,
}

impl OccupationPattern {
    pub fn new(counts: Vec<u8>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Pattern("pattern needs at least one mode".into()));
        }
        Ok(OccupationPattern { counts })
    }

    /// Pattern with one photon per listed mode (0-based). Repeated modes
    /// stack.
    pub fn from_modes(m: usize, modes: &[usize]) -> Result<Self> {
        let mut counts = vec![0u8; m];
        for &k in modes {
            if k >= m {
                return Err(Error::Pattern(format!("mode {k} out of range for {m} modes")));
            }
            counts[k] = counts[k]
                .checked_add(1)
                .ok_or_else(|| Error::Pattern("mode occupation overflow".into()))?;
        }
        Self::new(counts)
    }

    /// The standard experiment input: one photon in each of the first `n` modes.
    pub fn first_modes(m: usize, n: usize) -> Result<Self> {
        if n > m {
            return Err(Error::Pattern(format!("{n} photons do not fit collision-free in {m} modes")));
        }
        Self::from_modes(m, &(0..n).collect::<Vec<_>>())
    }

    pub fn modes(&self) -> usize {
        self.counts.len()
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.counts.iter().map(|&c| c as usize).sum()
    }

    pub fn is_collision_free(&self) -> bool {
        self.counts.iter().all(|&c| c <= 1)
    }

    /// Occupied modes listed with multiplicity, ascending.
    pub fn occupied(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(k, &c)| std::iter::repeat_n(k, c as usize))
            .collect()
    }

    /// `∏_k counts_k!`
    pub fn factorial_product(&self) -> f64 {
        self.counts.iter().map(|&c| (1..=c as u64).product::<u64>() as f64).product()
    }
}

impl fmt::Display for OccupationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.counts {
            if c < 10 {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})")?;
            }
        }
        Ok(())
    }
}

impl FromStr for OccupationPattern {
    type Err = Error;

    /// Parses one digit per mode, e.g. `"111000000000"` or `"210000000000"`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let counts = s
            .chars()
            .map(|ch| ch.to_digit(10).map(|d| d as u8))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Pattern(format!("malformed pattern string {s:?}")))?;
        Self::new(counts)
    }
}

impl TryFrom<String> for OccupationPattern {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<OccupationPattern> for String {
    fn from(p: OccupationPattern) -> Self {
        p.to_string()
    }
}
