use nlslab::harness::sweep::{aggregate_csv, expand, run_sweep, split_values};
use nlslab::harness::{initial_field, run_experiment, EstimateReport, ExperimentConfig, SCHEMA_VERSION};
use nlslab::Error;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_toml(text).unwrap()
}

fn small_2d(experiment: &str, amplitude: f64, flow: &str) -> ExperimentConfig {
    config(&format!(
        r#"
experiment = "{experiment}"
seed = 3
[grid]
n = 2
L = 16.0
M = 32
[solver]
p = 5.0
dt = 2e-3
T = 0.2
dt_out = 1e-2
flow = "{flow}"
[initial]
kind = "gaussian"
amplitude = {amplitude}
width = 1.5
"#
    ))
}

fn small_1d(experiment: &str, amplitude: f64) -> ExperimentConfig {
    config(&format!(
        r#"
experiment = "{experiment}"
seed = 3
[grid]
n = 1
L = 32.0
M = 256
[solver]
p = 3.0
dt = 1e-3
T = 0.5
dt_out = 1e-2
[initial]
kind = "gaussian"
amplitude = {amplitude}
width = 2.0
velocity = [0.3]
"#
    ))
}

#[test]
fn zero_data_gives_zero_lhs() {
    for cfg in [small_1d("thm2_1d_deriv", 0.0), small_1d("thm2_1d_p3", 0.0)] {
        let r = run_experiment(&cfg).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.ratio, 0.0);
    }
    let r = run_experiment(&small_2d("l4l8_2d", 0.0, "nonlinear")).unwrap();
    assert_eq!(r.lhs, 0.0);
}

#[test]
fn small_data_ratio_matches_linear_flow() {
    let nl = run_experiment(&small_2d("thm1_2d", 1e-3, "nonlinear")).unwrap();
    let lin = run_experiment(&small_2d("thm1_2d", 1e-3, "linear")).unwrap();
    assert!(nl.ratio.is_finite() && nl.ratio > 0.0);
    assert!((nl.ratio - lin.ratio).abs() <= 0.01 * lin.ratio, "{} {}", nl.ratio, lin.ratio);
}

#[test]
fn frozen_l4l8_is_quartic() {
    let a = run_experiment(&small_2d("l4l8_2d", 1.0, "frozen")).unwrap();
    let b = run_experiment(&small_2d("l4l8_2d", 2.0, "frozen")).unwrap();
    assert!((b.lhs / a.lhs - 16.0).abs() <= 16.0 * 1e-10);
    assert!((b.rhs / a.rhs - 16.0).abs() <= 16.0 * 1e-10);
    assert!((b.ratio - a.ratio).abs() <= 1e-6 * a.ratio);
    let chain = a.aux("chain_ratio").unwrap();
    assert!(chain.is_finite() && chain > 0.0);
}

#[test]
fn thm2_deriv_cross_formulation() {
    let r = run_experiment(&small_1d("thm2_1d_deriv", 1.0)).unwrap();
    assert!(r.ratio.is_finite() && r.ratio > 0.0);
    assert!(r.aux("cross_formulation_rel").unwrap() <= 0.02);
    assert!(r.aux("mass_drift").unwrap() <= 1e-10);
}

fn monotonicity_1d(dt: f64, flow: &str, velocity: f64) -> ExperimentConfig {
    config(&format!(
        r#"
experiment = "monotonicity"
seed = 1
[grid]
n = 1
L = 64.0
M = 512
[solver]
p = 3.0
dt = {dt}
T = 1.0
dt_out = 5e-2
flow = "{flow}"
[initial]
kind = "gaussian"
amplitude = 1.0
width = 2.0
velocity = [{velocity}]
[params]
weight = "erf"
epsilon = 0.25
"#
    ))
}

#[test]
fn monotonicity_curve_is_time_step_converged() {
    let m = |dt: f64| {
        run_experiment(&monotonicity_1d(dt, "nonlinear", 0.0)).unwrap().series["action"].column("M").unwrap()
    };
    let (a, b) = (m(1e-3), m(5e-4));
    let scale = a.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(diff <= 1e-6 * scale, "{}", diff / scale);
}

#[test]
fn free_flow_real_data_starts_at_zero_and_increases() {
    let r = run_experiment(&monotonicity_1d(1e-3, "linear", 0.0)).unwrap();
    let m = r.series["action"].column("M").unwrap();
    assert!(m[0].abs() <= 1e-12);
    assert!(m.windows(2).all(|w| w[1] >= w[0]));
    assert!(m[m.len() - 1] > 0.0);
    assert!(r.aux("worst_drop").unwrap() <= 1e-6 * r.aux("range").unwrap());
}

#[test]
fn scattering_linear_control() {
    let mut cfg = small_2d("scattering", 0.5, "linear");
    cfg.solver.t_final = 0.5;
    cfg.solver.dt_out = Some(0.05);
    let r = run_experiment(&cfg).unwrap();
    assert!(r.aux("d0").unwrap() <= 1e-10);
    let cfg3 = cfg.with_override("solver.p", "3.0").unwrap();
    let cfg3 = cfg3.with_override("solver.flow", "\"nonlinear\"").unwrap();
    let r3 = run_experiment(&cfg3).unwrap();
    assert!(r3.notes.iter().any(|n| n.contains("p <= 3")));
}

#[test]
fn i_energy_identity_above_nyquist() {
    let cfg = config(
        r#"
experiment = "i_energy"
seed = 1
[grid]
n = 2
L = 16.0
M = 64
[solver]
p = 5.0
dt = 1e-3
T = 0.05
dt_out = 1e-2
[initial]
kind = "gaussian"
amplitude = 1.0
width = 1.5
[params]
N = [32, 64]
s = 0.85
"#,
    );
    let r = run_experiment(&cfg).unwrap();
    for n in [32, 64] {
        let inc = r.aux(&format!("inc_N{n}")).unwrap();
        assert!(inc <= 1e-6, "N = {n}: {inc}");
    }
}

#[test]
fn i_energy_validation() {
    let base = "experiment = \"i_energy\"\n[grid]\nn = 2\nL = 16.0\nM = 64\n[solver]\np = P\ndt = 1e-3\nT = 0.05\n[initial]\nkind = \"gaussian\"\namplitude = 1.0\nwidth = 1.5\n[params]\nN = NL\ns = S\n";
    let make = |p: &str, n: &str, s: &str| ExperimentConfig::from_toml(&base.replace("P", p).replace("NL", n).replace("S", s));
    assert!(make("5.0", "[8, 16]", "0.85").is_ok());
    // p = 3 is k = 1; s must exceed s_2 = 0.8 for p = 5
    for (p, n, s) in [("3.0", "[8]", "0.9"), ("5.0", "[8]", "0.7"), ("5.0", "[12]", "0.85"), ("5.0", "[]", "0.85")] {
        match make(p, n, s) {
            Err(Error::Config { .. }) => {}
            other => panic!("{p} {n} {s}: {other:?}"),
        }
    }
}

#[test]
fn scale_invariance_identity_at_lambda_one() {
    let cfg = config(
        r#"
experiment = "scale_invariance"
seed = 3
[grid]
n = 1
L = 32.0
M = 256
[solver]
p = 3.0
dt = 1e-3
T = 0.5
dt_out = 1e-2
[initial]
kind = "gaussian"
amplitude = 1.0
width = 2.0
[params]
lambda = 1.0
"#,
    );
    let r = run_experiment(&cfg).unwrap();
    assert_eq!(r.aux("ratio_original").unwrap(), r.aux("ratio_rescaled").unwrap());
    assert_eq!(r.aux("frozen_agreement").unwrap(), 0.0);
}

#[test]
fn config_errors_name_the_key() {
    let text = small_2d("thm1_2d", 1.0, "nonlinear").to_toml();
    let bad = text.replace("[grid]\n", "[grid]\nbogus = 1\n");
    match ExperimentConfig::from_toml(&bad) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "grid.bogus"),
        other => panic!("{other:?}"),
    }
    let bad = text.replace("M = 32", "M = \"many\"");
    match ExperimentConfig::from_toml(&bad) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "grid.M"),
        other => panic!("{other:?}"),
    }
    let bad = text.replace("[solver]\n", "[solver]\np = 3.0\n");
    match ExperimentConfig::from_toml(&bad) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "solver.p"),
        other => panic!("{other:?}"),
    }
    let bad = text.replace("width = 1.5", "width = 1.5\nwidht = 2.0");
    match ExperimentConfig::from_toml(&bad) {
        Err(Error::Config { key, .. }) => assert_eq!(key, "initial.widht"),
        other => panic!("{other:?}"),
    }
    let wrong_dim = text.replace("n = 2", "n = 1");
    assert!(matches!(ExperimentConfig::from_toml(&wrong_dim), Err(Error::Config { .. })));
}

#[test]
fn config_hash_is_canonical() {
    let a = small_2d("thm1_2d", 1.0, "nonlinear");
    let reparsed = config(&a.to_toml());
    assert_eq!(a.hash(), reparsed.hash());
    let b = a.with_override("solver.p", "7").unwrap();
    assert_ne!(a.hash(), b.hash());
    assert_eq!(b.solver.p, 7.0);
}

#[test]
fn report_round_trip() {
    let r = run_experiment(&small_1d("thm2_1d_p3", 1.0)).unwrap();
    assert_eq!(r.schema_version, SCHEMA_VERSION);
    let back = EstimateReport::from_json(&r.to_json()).unwrap();
    assert_eq!(back.lhs, r.lhs);
    assert_eq!(back.series, r.series);
    assert!(r.series["conservation"].to_csv().starts_with("# schema_version=1\n"));
}

#[test]
fn random_initial_data_is_seeded() {
    let cfg = config(
        r#"
experiment = "thm1_2d"
seed = 9
[grid]
n = 2
L = 16.0
M = 32
[solver]
p = 5.0
dt = 1e-3
T = 0.01
[initial]
kind = "random_phase"
amplitude = 1.0
width = 2.0
modes = 6
bandwidth = 0.25
"#,
    );
    let g = cfg.make_grid().unwrap();
    let a = initial_field(&g, &cfg.initial, 9).unwrap();
    let b = initial_field(&g, &cfg.initial, 9).unwrap();
    let c = initial_field(&g, &cfg.initial, 10).unwrap();
    assert_eq!(a.values(), b.values());
    assert_ne!(a.values(), c.values());
}

#[test]
fn sweep_is_deterministic_across_worker_counts() {
    let base = small_2d("thm1_2d", 1.0, "nonlinear");
    let axes = vec![
        ("solver.p".to_string(), split_values("3.5,5,7")),
        ("initial.amplitude".to_string(), split_values("0.5, 1.0")),
    ];
    let jobs = expand(&base, &axes).unwrap();
    assert_eq!(jobs.len(), 6);
    let one = aggregate_csv(&run_sweep(jobs.clone(), 1));
    let three = aggregate_csv(&run_sweep(jobs, 3));
    assert_eq!(one, three);
    assert_eq!(one.lines().filter(|l| !l.starts_with('#')).count(), 7);
    assert!(expand(&base, &[("solver.p".into(), vec![])]).is_err());
    assert_eq!(split_values("[8, 16],[32]"), vec!["[8, 16]", "[32]"]);
}
