use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nlslab"))
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const THM1: &str = r#"
experiment = "thm1_2d"
seed = 4
[grid]
n = 2
L = 16.0
M = 32
[solver]
p = 5.0
dt = 2e-3
T = 0.1
dt_out = 1e-2
[initial]
kind = "gaussian"
amplitude = 1.0
width = 1.5
"#;

const MONO: &str = r#"
experiment = "monotonicity"
seed = 1
[grid]
n = 1
L = 64.0
M = 256
[solver]
p = 3.0
dt = 1e-3
T = 0.5
dt_out = 5e-2
[initial]
kind = "gaussian"
amplitude = 1.0
width = 2.0
[params]
weight = "erf"
epsilon = 0.5
"#;

const I_ENERGY: &str = r#"
experiment = "i_energy"
seed = 1
[grid]
n = 2
L = 16.0
M = 64
[solver]
p = 5.0
dt = 1e-3
T = 0.02
dt_out = 1e-2
[initial]
kind = "gaussian"
amplitude = 1.0
width = 1.5
[params]
N = [8]
s = 0.85
"#;

fn run(args: &[&str]) -> Output {
    bin().args(args).env_remove("NLSLAB_WORKERS").output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn data_rows(csv: &str) -> Vec<String> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).map(String::from).collect()
}

#[test]
fn run_writes_report_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "thm1.toml", THM1);
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("report.json"));
    for key in ["lhs", "rhs", "ratio", "schema_version", "config_hash", "aux"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert!(report["ratio"].as_f64().unwrap() > 0.0);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["config_hash"], report["config_hash"]);
    assert_eq!(manifest["seed"], 4);
    let csv = fs::read_to_string(out.join("aggregate.csv")).unwrap();
    assert!(csv.starts_with("schema_version,"));
    let rows = data_rows(&csv);
    assert_eq!(rows.len(), 1);
    assert!(rows[0].starts_with("1,"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "thm1.toml", THM1);
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--seed", "77"]);
    assert!(o.status.success());
    assert_eq!(json(&out.join("report.json"))["seed"], 77);
}

#[test]
fn rerun_gives_identical_aggregate_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "thm1.toml", THM1);
    let rows: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|d| {
            let out = tmp.path().join(d);
            assert!(run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
            fs::read(out.join("aggregate.csv")).unwrap()
        })
        .collect();
    assert_eq!(rows[0], rows[1]);
}

#[test]
fn malformed_config_exits_2_naming_the_key() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = THM1.replace("width = 1.5", "width = 1.5\nwidht = 2.0");
    let cfg = write_config(tmp.path(), "bad.toml", &bad);
    let out = tmp.path().join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = json(&out.join("error.json"));
    assert_eq!(err["key"], "initial.widht");
    assert_eq!(err["schema_version"], 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("widht"));

    let missing = run(&["run", "--config", "/nonexistent.toml", "--out", out.to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn sweep_over_p_gives_three_rows_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "thm1.toml", THM1);
    let out = tmp.path().join("sweep");
    let o = run(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--param", "solver.p", "--values",
        "3.5,5,7", "--workers", "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = data_rows(&fs::read_to_string(out.join("aggregate.csv")).unwrap());
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.contains(",ok,")));
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert!(summary.contains("thm1_2d") && summary.contains("spread"));
    for i in 0..3 {
        assert!(out.join(format!("runs/run_{i:04}/report.json")).is_file());
    }
}

#[test]
fn sweep_is_identical_across_worker_counts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "thm1.toml", THM1);
    let csv: Vec<Vec<u8>> = ["1", "3"]
        .iter()
        .map(|w| {
            let out = tmp.path().join(format!("w{w}"));
            let o = bin()
                .args([
                    "sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--param",
                    "initial.amplitude", "--values", "0.5,1,1.5",
                ])
                .env("NLSLAB_WORKERS", w)
                .output()
                .unwrap();
            assert!(o.status.success());
            fs::read(out.join("aggregate.csv")).unwrap()
        })
        .collect();
    assert_eq!(csv[0], csv[1]);
}

#[test]
fn sweep_rejects_empty_values() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "thm1.toml", THM1);
    let out = tmp.path().join("sweep");
    let o = run(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--param", "solver.p", "--values", "",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&out.join("error.json"))["key"], "solver.p");
}

#[test]
fn i_energy_sweep_reports_slope() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "ie.toml", I_ENERGY);
    let out = tmp.path().join("sweep");
    let o = run(&[
        "sweep", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--param", "params.N", "--values",
        "8,16,32",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("fitted slope"));
    assert!(fs::read_to_string(out.join("summary.csv")).unwrap().contains("i_energy_slope"));

    let plot = tmp.path().join("plot");
    let o = run(&["plotdata", "--reports", out.to_str().unwrap(), "--out", plot.to_str().unwrap()]);
    assert!(o.status.success());
    let inc = fs::read_to_string(plot.join("i_energy_increments.csv")).unwrap();
    let rows = data_rows(&inc);
    assert_eq!(rows.len(), 3);
    for r in rows {
        let v: Vec<f64> = r.split(',').map(|x| x.parse().unwrap()).collect();
        assert!((v[2] - v[0].ln()).abs() < 1e-12 && (v[3] - v[1].ln()).abs() < 1e-12);
    }
}

#[test]
fn plotdata_exports_monotone_action_and_drift() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "mono.toml", MONO);
    let out = tmp.path().join("run");
    assert!(run(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status.success());
    let o = run(&["plotdata", "--reports", out.to_str().unwrap(), "--svg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let plot = out.join("plotdata");
    let ts = fs::read_to_string(plot.join("run_timeseries.csv")).unwrap();
    assert!(ts.starts_with("# schema_version=1"));
    let header: Vec<&str> = ts.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(header, ["t", "mass", "energy", "momentum_x", "energy_drift", "M_a"]);
    let rows: Vec<Vec<f64>> =
        data_rows(&ts).iter().map(|r| r.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(rows.windows(2).all(|w| w[1][5] >= w[0][5]));
    let report = json(&out.join("report.json"));
    let drift = report["aux"]["energy_drift"].as_f64().unwrap();
    assert!(rows.iter().all(|r| r[4] <= drift));
    assert!(plot.join("run_timeseries.svg").is_file());
    assert!(fs::read_to_string(plot.join("run_action.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn plotdata_missing_reports_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["plotdata", "--reports", tmp.path().join("nothing").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["plotdata", "--reports", tmp.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}
