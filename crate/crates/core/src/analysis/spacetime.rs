//! Time quadrature over trajectory snapshots.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::norms::{hom_sobolev, lebesgue, lebesgue_real};
use crate::quadrature::{simpson, trapezoid};
use crate::solver::Trajectory;
use crate::spectral::real_gradient;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TimeRule {
    #[default]
    Trapezoid,
    Simpson,
}

/// `∫ g(u(t)) dt` over the snapshots.
pub fn time_integral(traj: &Trajectory, rule: TimeRule, g: impl Fn(&Field) -> f64) -> Result<f64> {
    let values: Vec<f64> = traj.fields().map(g).collect();
    integrate_series(&values, traj.dt_out(), rule)
}

pub fn integrate_series(values: &[f64], step: f64, rule: TimeRule) -> Result<f64> {
    match rule {
        TimeRule::Trapezoid => trapezoid(values, step),
        TimeRule::Simpson => simpson(values, step),
    }
}

/// `max_t g(u(t))` over the snapshots.
pub fn sup_over_time(traj: &Trajectory, g: impl Fn(&Field) -> f64) -> f64 {
    traj.fields().map(g).fold(f64::NEG_INFINITY, f64::max)
}

/// `‖|∇|^{1/2}(|u|²)‖²_{L²}` (2D) or `‖∂_x(|u|²)‖²_{L²}` (1D) at one time.
pub fn correlation_density(f: &Field) -> f64 {
    let dens = Field::from_real(f.grid(), &f.abs_sq());
    if f.grid().dim() == 2 {
        hom_sobolev(&dens, 0.5).powi(2)
    } else {
        let d = &real_gradient(f.grid(), &dens.real_parts())[0];
        d.iter().map(|v| v * v).sum::<f64>() * f.grid().spacing()
    }
}

/// Squared spacetime norm on the left of the correlation estimates:
/// `‖D^{1/2}(|u|²)‖²_{L²_t L²_x}` in 2D, `‖∂_x(|u|²)‖²_{L²_t L²_x}` in 1D.
pub fn interaction_lhs(traj: &Trajectory) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::InsufficientSnapshots(traj.len()));
    }
    time_integral(traj, TimeRule::Trapezoid, correlation_density)
}

/// `‖u‖^q_{L^q_t L^r_x}`.
pub fn spacetime_lebesgue_pow(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::InsufficientSnapshots(traj.len()));
    }
    let values = traj
        .fields()
        .map(|f| lebesgue(f, r).map(|v| v.powf(q)))
        .collect::<Result<Vec<f64>>>()?;
    trapezoid(&values, traj.dt_out())
}

/// `‖|u|²‖^q_{L^q_t L^r_x}`.
pub fn density_spacetime_pow(traj: &Trajectory, q: f64, r: f64) -> Result<f64> {
    if traj.len() < 2 {
        return Err(Error::InsufficientSnapshots(traj.len()));
    }
    let values = traj
        .fields()
        .map(|f| lebesgue_real(f.grid(), &f.abs_sq(), r).map(|v| v.powf(q)))
        .collect::<Result<Vec<f64>>>()?;
    trapezoid(&values, traj.dt_out())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonotoneStats {
    /// Most negative step `M(t_{i+1}) - M(t_i)` (0 if none is negative).
    pub worst_drop: f64,
    pub worst_interval: (f64, f64),
    pub range: f64,
    /// Smallest forward-difference slope.
    pub min_slope: f64,
}

/// Check that `values` is non-decreasing up to `rel_tol · (max - min)`.
pub fn check_monotone(times: &[f64], values: &[f64], rel_tol: f64) -> Result<MonotoneStats> {
    if values.len() < 2 || times.len() != values.len() {
        return Err(Error::InsufficientSnapshots(values.len()));
    }
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let range = max - min;
    let mut worst_drop: f64 = 0.0;
    let mut worst_interval = (times[0], times[0]);
    let mut min_slope = f64::INFINITY;
    for i in 0..values.len() - 1 {
        let step = values[i + 1] - values[i];
        min_slope = min_slope.min(step / (times[i + 1] - times[i]));
        if step < worst_drop {
            worst_drop = step;
            worst_interval = (times[i], times[i + 1]);
        }
    }
    let stats = MonotoneStats {
        worst_drop,
        worst_interval,
        range,
        min_slope,
    };
    let tolerance = rel_tol * range;
    if -worst_drop > tolerance {
        return Err(Error::MonotonicityViolation {
            t0: worst_interval.0,
            t1: worst_interval.1,
            drop: -worst_drop,
            tolerance,
        });
    }
    Ok(stats)
}
