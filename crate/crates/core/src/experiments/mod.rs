//! Reproducible experiment drivers and their tabular output.

mod conjugation;
mod divergence;
mod energy_gap;
mod shear;
pub mod svg;

pub use conjugation::{conjugation_experiment, ConjugationConfig};
pub use divergence::{divergence_experiment, doubling_increments, DivergenceConfig};
pub use energy_gap::{
    bump, energy_gap_experiment, support_case, EnergyGapSpec, SignConvention, SupportCase,
};
pub use shear::{build_shear, smoothstep, ProfileFamily, ShearProfileSpec, CLOSING_START};

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::Result;

/// Hex SHA-256 of the config's JSON serialization (struct field order).
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let json = serde_json::to_vec(config)?;
    let digest = Sha256::digest(&json);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> String {
    std::env::var("SOURCE_DATE_EPOCH").unwrap_or_else(|_| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default()
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub experiment: String,
    pub config_hash: String,
    pub grid: usize,
    pub steps: usize,
    pub seed: Option<u64>,
    /// Only in the JSON output; CSV stays byte-identical across runs.
    pub timestamp: String,
    #[serde(default)]
    pub extra: BTreeMap<String, f64>,
}

/// A named pass/fail check evaluated by an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Rows of named real columns plus metadata and checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub metadata: Metadata,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub checks: Vec<Check>,
}

impl ResultTable {
    pub fn new<T: Serialize>(experiment: &str, config: &T, grid: usize, steps: usize, seed: Option<u64>, columns: &[&str]) -> Result<Self> {
        Ok(Self {
            metadata: Metadata {
                experiment: experiment.into(),
                config_hash: config_hash(config)?,
                grid,
                steps,
                seed,
                timestamp: timestamp(),
                extra: BTreeMap::new(),
            },
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
        })
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// CSV with a header row; every row carries the config hash.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["config_hash".to_string()];
        header.extend(self.columns.iter().cloned());
        out.write_record(&header)?;
        for row in &self.rows {
            let mut rec = vec![self.metadata.config_hash.clone()];
            rec.extend(row.iter().map(|v| v.to_string()));
            out.write_record(&rec)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }

    pub fn write_json<W: Write>(&self, w: W) -> Result<()> {
        serde_json::to_writer_pretty(w, self)?;
        Ok(())
    }
}

/// `true` when every entry is strictly larger than its predecessor.
pub(crate) fn strictly_increasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] > w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Cfg {
        a: u32,
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = config_hash(&Cfg { a: 1 }).unwrap();
        assert_eq!(a, config_hash(&Cfg { a: 1 }).unwrap());
        assert_ne!(a, config_hash(&Cfg { a: 2 }).unwrap());
        assert_eq!(a.len(), 64);
    }

    #[test]
    fn csv_has_header_and_hash_column() {
        let mut t = ResultTable::new("demo", &Cfg { a: 1 }, 8, 1, None, &["i", "value"]).unwrap();
        t.push(vec![4.0, 0.5]);
        let s = t.to_csv_string().unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next().unwrap(), "config_hash,i,value");
        assert!(lines.next().unwrap().ends_with(",4,0.5"));
        assert_eq!(t.column("value").unwrap(), vec![0.5]);
    }
}
