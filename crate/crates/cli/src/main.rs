mod output;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nlslab::harness::sweep::{aggregate_csv, expand, run_sweep, split_values, summarize, SweepJob, SweepOutcome};
use nlslab::harness::{run_experiment, EstimateReport, ExperimentConfig};
use nlslab::Error;

use output::{write_atomic, write_error, ErrorRecord, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "nlslab", version, about = "Run NLS correlation-estimate experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and write report.json, aggregate.csv and manifest.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the cross product of parameter values over a base config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Dotted config key, e.g. `solver.p`. Repeat together with --values.
        #[arg(long, required = true)]
        param: Vec<String>,
        /// Comma-separated values for the matching --param, e.g. `3.5,5,7`.
        #[arg(long, required = true, allow_hyphen_values = true)]
        values: Vec<String>,
        #[arg(long, env = "NLSLAB_WORKERS")]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Export time series from report directories as CSV (and optionally SVG).
    Plotdata {
        /// A run or sweep output directory.
        #[arg(long = "reports", alias = "report-dir")]
        reports: PathBuf,
        /// Defaults to `<reports>/plotdata`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: bool,
    },
}

/// Exit status 2 marks bad input (usage, config, missing files); 1 marks a
/// failed computation.
struct Failure {
    code: u8,
    record: ErrorRecord,
}

impl Failure {
    fn usage(kind: &str, message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            record: ErrorRecord {
                schema_version: nlslab::harness::SCHEMA_VERSION,
                kind: kind.to_string(),
                key: None,
                message: message.into(),
                context: None,
            },
        }
    }

    fn from_error(e: Error, context: &str) -> Self {
        let (code, kind, key) = match &e {
            Error::Config { key, .. } => (2, "config", Some(key.clone())),
            Error::Io(_) => (1, "io", None),
            Error::TruncationBreach { .. } => (1, "truncation_breach", None),
            Error::NumericalBlowup { .. } => (1, "numerical_blowup", None),
            Error::MonotonicityViolation { .. } => (1, "monotonicity_violation", None),
            Error::BudgetExceeded { .. } => (1, "budget_exceeded", None),
            _ => (1, "computation", None),
        };
        Failure {
            code,
            record: ErrorRecord {
                schema_version: nlslab::harness::SCHEMA_VERSION,
                kind: kind.to_string(),
                key,
                message: e.to_string(),
                context: Some(context.to_string()),
            },
        }
    }

    fn io(e: std::io::Error, context: &str) -> Self {
        Failure::from_error(Error::Io(e), context)
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::usage("config", format!("cannot read {}: {e}", path.display())))?;
    let mut cfg =
        ExperimentConfig::from_toml(&text).map_err(|e| Failure::from_error(e, &path.display().to_string()))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn write_report(dir: &Path, report: &EstimateReport) -> std::io::Result<PathBuf> {
    let path = dir.join("report.json");
    write_atomic(&path, report.to_json().as_bytes())?;
    Ok(path)
}

fn rel(out: &Path, p: &Path) -> String {
    p.strip_prefix(out).unwrap_or(p).display().to_string()
}

fn cmd_run(config: &Path, out: &Path, seed: Option<u64>) -> Result<(), Failure> {
    let cfg = load_config(config, seed)?;
    let mut manifest = RunManifest::new("run", config, cfg.hash(), cfg.seed);
    let context = format!("{} ({})", config.display(), cfg.experiment);
    let job = SweepJob {
        index: 0,
        overrides: Vec::new(),
        config: cfg.clone(),
    };
    let result = run_experiment(&cfg);
    let outcome = SweepOutcome {
        job,
        result: result.as_ref().map(|r| r.clone()).map_err(|e| e.to_string()),
    };
    let csv = out.join("aggregate.csv");
    write_atomic(&csv, aggregate_csv(std::slice::from_ref(&outcome)).as_bytes()).map_err(|e| Failure::io(e, &context))?;
    manifest.outputs.push(rel(out, &csv));
    let report = result.map_err(|e| Failure::from_error(e, &context))?;
    let path = write_report(out, &report).map_err(|e| Failure::io(e, &context))?;
    manifest.outputs.push(rel(out, &path));
    manifest.finish(out).map_err(|e| Failure::io(e, &context))?;
    println!(
        "{}: lhs = {:.16e}, rhs = {:.16e}, ratio = {:.16e}",
        report.experiment, report.lhs, report.rhs, report.ratio
    );
    for note in &report.notes {
        println!("note: {note}");
    }
    Ok(())
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn cmd_sweep(
    config: &Path,
    out: &Path,
    params: &[String],
    values: &[String],
    workers: Option<usize>,
    seed: Option<u64>,
) -> Result<(), Failure> {
    if params.len() != values.len() {
        return Err(Failure::usage(
            "usage",
            format!("{} --param flags but {} --values flags", params.len(), values.len()),
        ));
    }
    let cfg = load_config(config, seed)?;
    let mut axes = Vec::new();
    for (p, v) in params.iter().zip(values) {
        let list = split_values(v);
        if list.is_empty() {
            let mut f = Failure::usage("usage", format!("empty value list for {p}"));
            f.record.key = Some(p.clone());
            return Err(f);
        }
        axes.push((p.clone(), list));
    }
    let jobs = expand(&cfg, &axes).map_err(|e| Failure::from_error(e, &config.display().to_string()))?;
    let mut manifest = RunManifest::new("sweep", config, cfg.hash(), cfg.seed);
    let workers = workers.unwrap_or_else(default_workers).max(1);
    let outcomes = run_sweep(jobs, workers);
    let context = config.display().to_string();
    for o in &outcomes {
        let dir = out.join("runs").join(format!("run_{:04}", o.job.index));
        match &o.result {
            Ok(r) => {
                let p = write_report(&dir, r).map_err(|e| Failure::io(e, &context))?;
                manifest.outputs.push(rel(out, &p));
            }
            Err(msg) => {
                let record = ErrorRecord {
                    schema_version: nlslab::harness::SCHEMA_VERSION,
                    kind: "run_failed".into(),
                    key: None,
                    message: msg.clone(),
                    context: Some(o.job.label()),
                };
                write_error(Some(&dir), &record);
                manifest.outputs.push(rel(out, &dir.join("error.json")));
            }
        }
    }
    let csv = out.join("aggregate.csv");
    write_atomic(&csv, aggregate_csv(&outcomes).as_bytes()).map_err(|e| Failure::io(e, &context))?;
    let summary = summarize(&outcomes);
    let sum_path = out.join("summary.csv");
    write_atomic(&sum_path, summary.to_csv().as_bytes()).map_err(|e| Failure::io(e, &context))?;
    manifest.outputs.push(rel(out, &csv));
    manifest.outputs.push(rel(out, &sum_path));
    manifest.finish(out).map_err(|e| Failure::io(e, &context))?;

    let failed = outcomes.iter().filter(|o| o.result.is_err()).count();
    println!("{} runs, {} failed", outcomes.len(), failed);
    for (name, s) in &summary.per_experiment {
        println!(
            "{name}: ratio min {:.6e} median {:.6e} max {:.6e} spread {:.4}",
            s.min, s.median, s.max, s.spread
        );
    }
    if let Some(slope) = summary.i_energy_slope {
        println!("i_energy fitted slope {slope:.4}");
    }
    Ok(())
}

fn cmd_plotdata(reports: &Path, out: Option<&Path>, svg: bool) -> Result<(), Failure> {
    let paths = plot::find_reports(reports)
        .map_err(|e| Failure::usage("missing_reports", format!("{}: {e}", reports.display())))?;
    if paths.is_empty() {
        return Err(Failure::usage(
            "missing_reports",
            format!("no report.json under {}", reports.display()),
        ));
    }
    let mut loaded = Vec::new();
    for p in paths {
        let text = fs::read_to_string(&p).map_err(|e| Failure::usage("missing_reports", format!("{}: {e}", p.display())))?;
        let r = EstimateReport::from_json(&text)
            .map_err(|e| Failure::usage("bad_report", format!("{}: {e}", p.display())))?;
        loaded.push((p, r));
    }
    let out = out.map(Path::to_path_buf).unwrap_or_else(|| reports.join("plotdata"));
    let written = plot::export(reports, &loaded, &out, svg).map_err(|e| Failure::io(e, &out.display().to_string()))?;
    println!("wrote {} files to {}", written.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (result, out) = match &cli.command {
        Command::Run { config, out, seed } => (cmd_run(config, out, *seed), Some(out.clone())),
        Command::Sweep {
            config,
            out,
            param,
            values,
            workers,
            seed,
        } => (cmd_sweep(config, out, param, values, *workers, *seed), Some(out.clone())),
        Command::Plotdata { reports, out, svg } => (cmd_plotdata(reports, out.as_deref(), *svg), out.clone()),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.record.message);
            write_error(out.as_ref(), &f.record);
            ExitCode::from(f.code)
        }
    }
}
