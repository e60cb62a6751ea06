//! Parameter sweeps over a base config, run on a bounded worker pool.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use crate::error::{Error, Result};
use crate::harness::config::ExperimentConfig;
use crate::harness::experiments::{log_log_slope, run_experiment};
use crate::harness::report::{fmt_num, EstimateReport, SCHEMA_VERSION};

#[derive(Clone, Debug)]
pub struct SweepJob {
    pub index: usize,
    /// `(dotted key, value text)` applied to the base config.
    pub overrides: Vec<(String, String)>,
    pub config: ExperimentConfig,
}

impl SweepJob {
    pub fn label(&self) -> String {
        self.overrides
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub job: SweepJob,
    pub result: std::result::Result<EstimateReport, String>,
}

/// Split a value list on commas that are not inside brackets or quotes:
/// `3.5,5,7` or `[8,16],[16,32]`.
pub fn split_values(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut quoted = false;
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '"' => quoted = !quoted,
            '[' if !quoted => depth += 1,
            ']' if !quoted => depth -= 1,
            ',' if depth == 0 && !quoted => {
                out.push(cur.trim().to_string());
                cur.clear();
                continue;
            }
            _ => {}
        }
        cur.push(c);
    }
    if !cur.trim().is_empty() || !out.is_empty() {
        out.push(cur.trim().to_string());
    }
    out.retain(|v| !v.is_empty());
    out
}

/// Cross product of the value lists, in row-major order of `axes`.
pub fn expand(base: &ExperimentConfig, axes: &[(String, Vec<String>)]) -> Result<Vec<SweepJob>> {
    for (key, values) in axes {
        if values.is_empty() {
            return Err(Error::config(key.clone(), "empty value list"));
        }
    }
    let mut combos: Vec<Vec<(String, String)>> = vec![Vec::new()];
    for (key, values) in axes {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push((key.clone(), v.clone()));
                    c
                })
            })
            .collect();
    }
    combos
        .into_iter()
        .enumerate()
        .map(|(index, overrides)| {
            let mut config = base.clone();
            for (k, v) in &overrides {
                config = config.with_override(k, v)?;
            }
            Ok(SweepJob {
                index,
                overrides,
                config,
            })
        })
        .collect()
}

/// Run every job on at most `workers` threads. Outcomes are returned in job
/// order whatever the completion order; failures are kept, not propagated.
pub fn run_sweep(jobs: Vec<SweepJob>, workers: usize) -> Vec<SweepOutcome> {
    let workers = workers.max(1).min(jobs.len().max(1));
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<SweepOutcome>>> = Mutex::new(vec![None; jobs.len()]);
    thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let result = run_experiment(&job.config).map_err(|e| e.to_string());
                let outcome = SweepOutcome {
                    job: job.clone(),
                    result,
                };
                slots.lock().expect("no worker panicked")[i] = Some(outcome);
            });
        }
    });
    slots
        .into_inner()
        .expect("no worker panicked")
        .into_iter()
        .map(|o| o.expect("every job ran"))
        .collect()
}

pub const CSV_COLUMNS: &[&str] = &[
    "schema_version",
    "index",
    "experiment",
    "params",
    "config_hash",
    "seed",
    "status",
    "lhs",
    "rhs",
    "ratio",
    "max_outer_fraction",
    "max_sup_ratio",
    "error",
];

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// One CSV row per outcome. Wall time is left out so reruns are byte-identical.
pub fn aggregate_csv(outcomes: &[SweepOutcome]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for o in outcomes {
        let cfg = &o.job.config;
        let mut row = vec![
            SCHEMA_VERSION.to_string(),
            o.job.index.to_string(),
            cfg.experiment.name().to_string(),
            csv_field(&o.job.label()),
            cfg.hash(),
            cfg.seed.to_string(),
        ];
        match &o.result {
            Ok(r) => {
                row.push("ok".into());
                for v in [r.lhs, r.rhs, r.ratio] {
                    row.push(fmt_num(v));
                }
                for key in ["max_outer_fraction", "max_sup_ratio"] {
                    row.push(r.aux(key).map(fmt_num).unwrap_or_default());
                }
                row.push(String::new());
            }
            Err(e) => {
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), 5));
                row.push(csv_field(e));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RatioStats {
    pub runs: usize,
    pub failed: usize,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    /// `max / min`.
    pub spread: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepSummary {
    pub per_experiment: BTreeMap<String, RatioStats>,
    /// Fitted slope of the final-N increment against N over i_energy rows.
    pub i_energy_slope: Option<f64>,
}

pub fn summarize(outcomes: &[SweepOutcome]) -> SweepSummary {
    let mut groups: BTreeMap<String, (Vec<f64>, usize)> = BTreeMap::new();
    let mut n_inc: Vec<(f64, f64)> = Vec::new();
    for o in outcomes {
        let entry = groups.entry(o.job.config.experiment.name().to_string()).or_default();
        match &o.result {
            Ok(r) => {
                entry.0.push(r.ratio);
                if let (Some(n), Some(inc)) = (r.aux("N"), r.aux("inc")) {
                    n_inc.push((n, inc));
                }
            }
            Err(_) => entry.1 += 1,
        }
    }
    let per_experiment = groups
        .into_iter()
        .map(|(name, (mut ratios, failed))| {
            ratios.sort_by(f64::total_cmp);
            let stats = if ratios.is_empty() {
                RatioStats {
                    failed,
                    ..Default::default()
                }
            } else {
                let k = ratios.len();
                let median = if k % 2 == 1 {
                    ratios[k / 2]
                } else {
                    0.5 * (ratios[k / 2 - 1] + ratios[k / 2])
                };
                RatioStats {
                    runs: k,
                    failed,
                    min: ratios[0],
                    max: ratios[k - 1],
                    median,
                    spread: ratios[k - 1] / ratios[0],
                }
            };
            (name, stats)
        })
        .collect();
    n_inc.sort_by(|a, b| a.0.total_cmp(&b.0));
    n_inc.dedup_by(|a, b| a.0 == b.0);
    let i_energy_slope = (n_inc.len() >= 2).then(|| {
        let (n, inc): (Vec<f64>, Vec<f64>) = n_inc.into_iter().unzip();
        log_log_slope(&n, &inc)
    });
    SweepSummary {
        per_experiment,
        i_energy_slope,
    }
}

impl SweepSummary {
    pub fn to_csv(&self) -> String {
        let mut out = format!("# schema_version={SCHEMA_VERSION}\nexperiment,runs,failed,min_ratio,max_ratio,median_ratio,spread\n");
        for (name, s) in &self.per_experiment {
            out.push_str(&format!(
                "{name},{},{},{},{},{},{}\n",
                s.runs,
                s.failed,
                fmt_num(s.min),
                fmt_num(s.max),
                fmt_num(s.median),
                fmt_num(s.spread)
            ));
        }
        if let Some(slope) = self.i_energy_slope {
            out.push_str(&format!("# i_energy_slope={}\n", fmt_num(slope)));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splits_top_level_commas() {
        assert_eq!(split_values("3.5, 5,7"), vec!["3.5", "5", "7"]);
        assert_eq!(split_values("[8,16],[16, 32]"), vec!["[8,16]", "[16, 32]"]);
        assert_eq!(split_values("\"a,b\",c"), vec!["\"a,b\"", "c"]);
        assert!(split_values("").is_empty());
        assert!(split_values(" , ").is_empty());
    }
}
