//! Experiment reports.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::harness::config::ExperimentConfig;

pub const SCHEMA_VERSION: u32 = 1;

/// A table of numbers with named columns.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Series {
    pub fn new(columns: &[&str]) -> Self {
        Series {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    /// CSV with a leading `# schema_version=N` line and 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema_version={SCHEMA_VERSION}\n{}\n", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| fmt_num(*v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Full double precision (17 significant digits).
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub schema_version: u32,
    pub experiment: String,
    pub config_hash: String,
    pub seed: u64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs / rhs`.
    pub ratio: f64,
    /// Named diagnostics: sup-norms, guard statistics, drifts, fits.
    pub aux: BTreeMap<String, f64>,
    /// Messages about conditions that are logged rather than asserted.
    pub notes: Vec<String>,
    pub series: BTreeMap<String, Series>,
    pub config: ExperimentConfig,
    pub wall_time_s: f64,
}

impl EstimateReport {
    /// `ratio = lhs / rhs`, except that `0 / 0` is recorded as 0 (zero data).
    pub fn new(config: &ExperimentConfig, lhs: f64, rhs: f64) -> Self {
        let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
        EstimateReport {
            schema_version: SCHEMA_VERSION,
            experiment: config.experiment.name().to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            lhs,
            rhs,
            ratio,
            aux: BTreeMap::new(),
            notes: Vec::new(),
            series: BTreeMap::new(),
            config: config.clone(),
            wall_time_s: 0.0,
        }
    }

    pub fn aux(&self, key: &str) -> Option<f64> {
        self.aux.get(key).copied()
    }

    pub fn set(&mut self, key: &str, value: f64) {
        self.aux.insert(key.to_string(), value);
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
