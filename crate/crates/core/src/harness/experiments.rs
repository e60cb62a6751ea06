//! The named experiments. Each evolves the configured initial data and
//! evaluates one estimate or behaviour along the trajectory.

use std::time::Instant;

use crate::analysis::{
    check_monotone, correlation_density, density_spacetime_pow, densities, erf_action_terms, integrate_series,
    interaction_action_from, interaction_lhs, spacetime_lebesgue_pow, sup_over_time, TimeRule,
};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::harness::config::{ExperimentConfig, ExperimentKind};
use crate::harness::initial::initial_field;
use crate::harness::report::{EstimateReport, Series};
use crate::norms::{hom_sobolev, inhom_sobolev, lebesgue, lebesgue_real};
use crate::pairs::DEFAULT_PAIR_CAP;
use crate::solver::{
    energy, evolve_with, kinetic_energy, mass, momentum, BreachPolicy, EvolveOptions, Flow, SolverConfig, Trajectory,
};
use crate::spectral::{free_propagate, i_operator};
use crate::weights::{bilaplacian_pairing_capped, weight_abs, weight_r0};

/// Run the experiment named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut report = match cfg.experiment {
        ExperimentKind::Thm1TwoD => run_thm1_2d(cfg),
        ExperimentKind::Thm2Deriv => run_thm2_deriv(cfg),
        ExperimentKind::Thm2P3 => run_thm2_p3(cfg),
        ExperimentKind::L4L8 => run_l4l8_2d(cfg),
        ExperimentKind::Monotonicity => run_monotonicity(cfg),
        ExperimentKind::Scattering => run_scattering(cfg),
        ExperimentKind::IEnergy => run_i_energy(cfg),
        ExperimentKind::ScaleInvariance => run_scale_invariance(cfg),
    }?;
    report.wall_time_s = start.elapsed().as_secs_f64();
    Ok(report)
}

fn pair_cap(cfg: &ExperimentConfig) -> u128 {
    cfg.params.pair_cap.map(u128::from).unwrap_or(DEFAULT_PAIR_CAP)
}

fn trajectory(cfg: &ExperimentConfig, breach: BreachPolicy) -> Result<Trajectory> {
    let grid = cfg.make_grid()?;
    let f0 = initial_field(&grid, &cfg.initial, cfg.seed)?;
    evolve_from(cfg, &f0, &cfg.solver_config()?, breach)
}

fn evolve_from(cfg: &ExperimentConfig, f0: &Field, sc: &SolverConfig, breach: BreachPolicy) -> Result<Trajectory> {
    let opts = EvolveOptions {
        flow: cfg.solver.flow,
        breach,
        ..Default::default()
    };
    evolve_with(f0, sc, &opts)
}

fn l2(f: &Field) -> f64 {
    lebesgue(f, 2.0).expect("r = 2 is valid")
}

fn conserved_energy(f: &Field, p: f64, flow: Flow) -> f64 {
    match flow {
        Flow::Nonlinear => energy(f, p),
        Flow::Linear | Flow::Frozen => kinetic_energy(f),
    }
}

/// Guard statistics, conservation drifts and the conservation series.
fn record_common(report: &mut EstimateReport, traj: &Trajectory) {
    let p = traj.config().p;
    let g = traj.guard();
    report.set("max_outer_fraction", g.max_outer_fraction);
    report.set("max_sup_ratio", g.max_sup_ratio);
    if let Some((t, frac)) = g.breach {
        report.set("breach_time", t);
        report.set("breach_fraction", frac);
        report.notes.push(format!("truncation guard tripped at t = {t}; later snapshots dropped"));
    }
    let dim = traj.grid().dim();
    let mut cols = vec!["t", "mass", "energy", "momentum_x"];
    if dim == 2 {
        cols.push("momentum_y");
    }
    let mut series = Series::new(&cols);
    for (t, f) in traj.snapshots() {
        let mut row = vec![*t, mass(f), conserved_energy(f, p, traj.flow())];
        row.extend(momentum(f));
        series.push(row);
    }
    let first = series.rows[0].clone();
    let drift = |j: usize, relative: bool| {
        let base = if relative && first[j] != 0.0 { first[j].abs() } else { 1.0 };
        series.rows.iter().map(|r| (r[j] - first[j]).abs() / base).fold(0.0, f64::max)
    };
    report.set("mass_drift", drift(1, true));
    report.set("energy_drift", drift(2, true));
    let mom = (3..cols.len()).map(|j| drift(j, false)).fold(0.0, f64::max);
    report.set("momentum_drift", mom);
    report.series.insert("conservation".into(), series);
}

fn sup_norms(traj: &Trajectory) -> (f64, f64, f64) {
    (
        sup_over_time(traj, l2),
        sup_over_time(traj, |f| hom_sobolev(f, 0.5)),
        sup_over_time(traj, |f| hom_sobolev(f, 1.0)),
    )
}

fn correlation_series(traj: &Trajectory) -> Series {
    let mut s = Series::new(&["t", "correlation_density"]);
    for (t, f) in traj.snapshots() {
        s.push(vec![*t, correlation_density(f)]);
    }
    s
}

pub fn run_thm1_2d(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let traj = trajectory(cfg, BreachPolicy::Error)?;
    let (sup_l2, sup_h12, _) = sup_norms(&traj);
    let lhs_sq = interaction_lhs(&traj)?;
    let mut r = EstimateReport::new(cfg, lhs_sq.sqrt(), sup_h12 * sup_l2);
    r.set("sup_l2", sup_l2);
    r.set("sup_h_half", sup_h12);
    r.set("lhs_sq", lhs_sq);
    r.series.insert("correlation".into(), correlation_series(&traj));
    record_common(&mut r, &traj);
    Ok(r)
}

/// Default heat-kernel scale for the erf-action cross-check: `2h`.
fn cross_check_epsilon(cfg: &ExperimentConfig) -> f64 {
    cfg.params
        .epsilon
        .unwrap_or(2.0 * cfg.grid.length / cfg.grid.points as f64)
}

pub fn run_thm2_deriv(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let traj = trajectory(cfg, BreachPolicy::Error)?;
    let (sup_l2, _, sup_h1) = sup_norms(&traj);
    let lhs_sq = interaction_lhs(&traj)?;
    let mut r = EstimateReport::new(cfg, lhs_sq.sqrt(), sup_h1.sqrt() * sup_l2.powf(1.5));
    r.set("sup_l2", sup_l2);
    r.set("sup_h1", sup_h1);
    r.set("lhs_sq", lhs_sq);
    r.series.insert("correlation".into(), correlation_series(&traj));

    // lhs² against the time integral of 4·P1, P1 → ∫ρ_x² as ε → 0
    let eps = cross_check_epsilon(cfg);
    let mut p1 = Vec::with_capacity(traj.len());
    let mut s = Series::new(&["t", "M", "P1", "P2", "P3", "P4"]);
    for (t, f) in traj.snapshots() {
        let terms = erf_action_terms(f, cfg.solver.p, eps)?;
        p1.push(4.0 * terms.p1);
        s.push(vec![*t, terms.m, terms.p1, terms.p2, terms.p3, terms.p4]);
    }
    let cross = integrate_series(&p1, traj.dt_out(), TimeRule::Trapezoid)?;
    r.set("epsilon", eps);
    r.set("erf_p1_integral", cross);
    r.set("cross_formulation_rel", (cross - lhs_sq).abs() / lhs_sq.abs().max(f64::MIN_POSITIVE));
    r.series.insert("erf_action".into(), s);
    record_common(&mut r, &traj);
    Ok(r)
}

fn p3_rhs(sup_l2: f64, sup_h1: f64) -> f64 {
    sup_l2.powi(3) * sup_h1
}

pub fn run_thm2_p3(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let traj = trajectory(cfg, BreachPolicy::Error)?;
    let (sup_l2, _, sup_h1) = sup_norms(&traj);
    let q = cfg.solver.p + 3.0;
    let lhs = spacetime_lebesgue_pow(&traj, q, q)?;
    let mut r = EstimateReport::new(cfg, lhs, p3_rhs(sup_l2, sup_h1));
    r.set("sup_l2", sup_l2);
    r.set("sup_h1", sup_h1);
    record_common(&mut r, &traj);
    Ok(r)
}

pub fn run_l4l8_2d(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let traj = trajectory(cfg, BreachPolicy::Error)?;
    let (sup_l2, sup_h12, _) = sup_norms(&traj);
    let lhs = spacetime_lebesgue_pow(&traj, 4.0, 8.0)?;
    let mut r = EstimateReport::new(cfg, lhs, sup_h12.powi(2) * sup_l2.powi(2));
    r.set("sup_l2", sup_l2);
    r.set("sup_h_half", sup_h12);

    // ‖u‖⁴_{L⁴L⁸} = ‖|u|²‖²_{L²L⁴} ≲ ‖D^{1/2}|u|²‖²_{L²L²}
    let density_sq = density_spacetime_pow(&traj, 2.0, 4.0)?;
    let correlation_sq = interaction_lhs(&traj)?;
    let mut embed: f64 = 0.0;
    for f in traj.fields() {
        let c = correlation_density(f);
        if c > 0.0 {
            let l4 = lebesgue_real(f.grid(), &f.abs_sq(), 4.0)?;
            embed = embed.max(l4 * l4 / c);
        }
    }
    r.set("density_l2l4_sq", density_sq);
    r.set("correlation_sq", correlation_sq);
    r.set("chain_ratio", if correlation_sq > 0.0 { lhs / correlation_sq } else { 0.0 });
    r.set("sobolev_constant_sq", embed);
    r.series.insert("correlation".into(), correlation_series(&traj));
    record_common(&mut r, &traj);
    Ok(r)
}

pub fn run_monotonicity(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let traj = trajectory(cfg, BreachPolicy::Error)?;
    let grid = traj.grid().clone();
    let weight = cfg
        .params
        .weight
        .clone()
        .unwrap_or_else(|| if grid.dim() == 1 { "erf".into() } else { "r0".into() });
    let tol = cfg.params.tolerance.unwrap_or(1e-6);
    let cap = pair_cap(cfg);
    let times = traj.times();
    let mut m_values = Vec::with_capacity(traj.len());
    // integrand of the positive left-hand side
    let mut lhs_density = Vec::with_capacity(traj.len());
    let mut series;
    let mut identity_residual = None;
    match weight.as_str() {
        "erf" => {
            let eps = cfg.params.epsilon.expect("validated");
            let mut derivative = Vec::with_capacity(traj.len());
            series = Series::new(&["t", "M", "dMdt", "P1", "P2", "P3", "P4"]);
            for (t, f) in traj.snapshots() {
                let terms = erf_action_terms(f, cfg.solver.p, eps)?;
                m_values.push(terms.m);
                derivative.push(terms.derivative());
                lhs_density.push(terms.p1 + terms.p4);
                series.push(vec![*t, terms.m, terms.derivative(), terms.p1, terms.p2, terms.p3, terms.p4]);
            }
            let integrated = integrate_series(&derivative, traj.dt_out(), TimeRule::Trapezoid)?;
            let delta = m_values[m_values.len() - 1] - m_values[0];
            let scale = m_values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
            identity_residual = Some((integrated - delta).abs() / scale);
        }
        "r0" | "abs" => {
            let w = if weight == "r0" {
                weight_r0(cfg.params.r0.expect("validated"))?
            } else {
                weight_abs()
            };
            series = Series::new(&["t", "M", "lhs_density"]);
            for (t, f) in traj.snapshots() {
                let d = densities(f);
                let m = interaction_action_from(&d, &w, cap)?;
                let l = if weight == "r0" {
                    4.0 * bilaplacian_pairing_capped(&w, &grid, d.rho(), d.rho(), cap)?
                } else {
                    correlation_density(f)
                };
                m_values.push(m);
                lhs_density.push(l);
                series.push(vec![*t, m, l]);
            }
        }
        other => return Err(Error::config("params.weight", format!("unknown weight {other:?}"))),
    }
    let stats = check_monotone(&times, &m_values, tol)?;
    let lhs = integrate_series(&lhs_density, traj.dt_out(), TimeRule::Trapezoid)?;
    let sup_m = m_values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let mut r = EstimateReport::new(cfg, lhs, 2.0 * sup_m);
    r.set("sup_abs_m", sup_m);
    r.set("delta_m", m_values[m_values.len() - 1] - m_values[0]);
    r.set("worst_drop", stats.worst_drop);
    r.set("min_slope", stats.min_slope);
    r.set("range", stats.range);
    r.set("tolerance", tol);
    if let Some(res) = identity_residual {
        r.set("identity_residual", res);
    }
    r.series.insert("action".into(), series);
    record_common(&mut r, &traj);
    Ok(r)
}

pub fn run_scattering(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let traj = trajectory(cfg, BreachPolicy::Stop)?;
    if traj.len() < 3 {
        return Err(Error::InsufficientSnapshots(traj.len()));
    }
    let v: Vec<Field> = traj.snapshots().iter().map(|(t, f)| free_propagate(f, -t)).collect();
    let k = v.len();
    // d(τ_i) = max over j, l ≥ i of ‖v_j - v_l‖_{H¹}
    let mut d = vec![0.0; k];
    for i in (0..k).rev() {
        let mut best: f64 = if i + 1 < k { d[i + 1] } else { 0.0 };
        for l in i + 1..k {
            let diff: Vec<_> = v[i].values().iter().zip(v[l].values()).map(|(a, b)| a - b).collect();
            best = best.max(inhom_sobolev(&Field::new(traj.grid(), diff)?, 1.0));
        }
        d[i] = best;
    }
    let times = traj.times();
    let half = times[k - 1] / 2.0;
    let i_half = times.iter().position(|&t| t >= half - 1e-12).unwrap_or(k - 1);
    let mut r = EstimateReport::new(cfg, d[i_half], d[0]);
    r.set("d0", d[0]);
    r.set("d_half", d[i_half]);
    r.set("t_half", times[i_half]);
    r.set("t_end", times[k - 1]);
    if cfg.solver.p <= 3.0 {
        r.notes
            .push("p <= 3 lies outside the scattering range; the tail decay is logged, not asserted".into());
    }
    let mut s = Series::new(&["t", "cauchy_tail"]);
    for (t, di) in times.iter().zip(&d) {
        s.push(vec![*t, *di]);
    }
    r.series.insert("cauchy_tail".into(), s);
    record_common(&mut r, &traj);
    Ok(r)
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a.ln(), b.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn run_i_energy(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let traj = trajectory(cfg, BreachPolicy::Error)?;
    let s = cfg.params.s.expect("validated");
    let ns = cfg.params.n_list.clone().expect("validated");
    let length = traj.grid().length();
    let p = cfg.solver.p;
    let mut inc = Vec::with_capacity(ns.len());
    let mut inc_series = Series::new(&["N", "inc", "lower", "upper"]);
    let mut cols = vec!["t".to_string()];
    cols.extend(ns.iter().map(|n| format!("E_N{n}")));
    let mut energies = Series {
        columns: cols,
        rows: traj.times().into_iter().map(|t| vec![t]).collect(),
    };
    let mut r = EstimateReport::new(cfg, 0.0, 1.0);
    for &n in &ns {
        let cycles = n / length;
        let n_ang = 2.0 * std::f64::consts::PI * cycles;
        let mut e0 = 0.0;
        let mut worst: f64 = 0.0;
        let (mut lower, mut upper): (f64, f64) = (0.0, 0.0);
        for (i, f) in traj.fields().enumerate() {
            let iu = i_operator(f, cycles, s)?;
            let e = energy(&iu, p);
            if i == 0 {
                e0 = e;
            }
            worst = worst.max((e - e0).abs());
            energies.rows[i].push(e);
            let (hs, h1) = (inhom_sobolev(f, s), inhom_sobolev(&iu, 1.0));
            lower = lower.max(hs / h1);
            upper = upper.max(h1 / (n_ang.powf(1.0 - s) * hs));
        }
        r.set(&format!("inc_N{n}"), worst);
        r.set(&format!("lower_N{n}"), lower);
        r.set(&format!("upper_N{n}"), upper);
        inc_series.push(vec![n, worst, lower, upper]);
        inc.push(worst);
    }
    let slope = if ns.len() >= 2 { log_log_slope(&ns, &inc) } else { f64::NAN };
    let monotone = inc.windows(2).all(|w| w[1] <= w[0]);
    r.lhs = inc[inc.len() - 1];
    r.rhs = inc[0];
    r.ratio = if r.rhs > 0.0 { r.lhs / r.rhs } else { 0.0 };
    if slope.is_finite() {
        r.set("slope", slope);
    }
    r.set("monotone", if monotone { 1.0 } else { 0.0 });
    r.set("N", ns[ns.len() - 1]);
    r.set("inc", inc[inc.len() - 1]);
    r.series.insert("increments".into(), inc_series);
    r.series.insert("modified_energy".into(), energies);
    record_common(&mut r, &traj);
    Ok(r)
}

/// `T·‖u‖^{p+3}_{L^{p+3}} / (‖u‖³_{L²}‖u‖_{Ḣ¹})` for data held fixed over `[0, T]`.
fn frozen_p3_ratio(f: &Field, p: f64, t: f64) -> Result<f64> {
    let q = p + 3.0;
    Ok(t * lebesgue(f, q)?.powf(q) / p3_rhs(l2(f), hom_sobolev(f, 1.0)))
}

pub fn run_scale_invariance(cfg: &ExperimentConfig) -> Result<EstimateReport> {
    let lambda = cfg.params.lambda.expect("validated");
    let p = cfg.solver.p;
    let q = p + 3.0;
    let sc = cfg.solver_config()?;
    let grid = cfg.make_grid()?;
    let f0 = initial_field(&grid, &cfg.initial, cfg.seed)?;
    let (g0, _) = crate::solver::rescale(&f0, lambda, p)?;
    let l2s = lambda * lambda;
    let sc_l = SolverConfig::new(p, sc.dt * l2s, sc.t_final * l2s, sc.dt_out * l2s)?;

    let ratio_of = |traj: &Trajectory| -> Result<f64> {
        let (sup_l2, _, sup_h1) = sup_norms(traj);
        Ok(spacetime_lebesgue_pow(traj, q, q)? / p3_rhs(sup_l2, sup_h1))
    };
    let base = evolve_from(cfg, &f0, &sc, BreachPolicy::Error)?;
    let scaled = evolve_from(cfg, &g0, &sc_l, BreachPolicy::Error)?;
    let (r1, r2) = (ratio_of(&base)?, ratio_of(&scaled)?);

    let frozen1 = frozen_p3_ratio(&f0, p, sc.t_final)?;
    let frozen2 = frozen_p3_ratio(&g0, p, sc_l.t_final)?;
    let mut r = EstimateReport::new(cfg, r2, r1);
    r.set("lambda", lambda);
    r.set("ratio_original", r1);
    r.set("ratio_rescaled", r2);
    r.set("evolved_agreement", (r2 / r1 - 1.0).abs());
    r.set("frozen_ratio_original", frozen1);
    r.set("frozen_ratio_rescaled", frozen2);
    r.set("frozen_agreement", (frozen2 / frozen1 - 1.0).abs());
    record_common(&mut r, &base);
    Ok(r)
}
