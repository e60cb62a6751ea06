//! Lebesgue and Sobolev norms of sampled fields.

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::spectral::spectrum;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormKind {
    /// `L^r`, `r` in `[1, ∞]`.
    Lebesgue(f64),
    /// `Ḣ^s`, symbol `|2πξ|^s`; for `s < 0` the zero mode is dropped.
    Homogeneous(f64),
    /// `H^s`, symbol `(1 + |2πξ|²)^{s/2}`.
    Inhomogeneous(f64),
}

pub fn norm(f: &Field, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Lebesgue(r) => lebesgue(f, r),
        NormKind::Homogeneous(s) => Ok(hom_sobolev(f, s)),
        NormKind::Inhomogeneous(s) => Ok(inhom_sobolev(f, s)),
    }
}

/// Riemann-sum `L^r` norm of complex samples.
pub fn lebesgue(f: &Field, r: f64) -> Result<f64> {
    lebesgue_abs(f.grid(), f.values().iter().map(|v| v.norm()), r)
}

/// `L^r` norm of a real sampled function.
pub fn lebesgue_real(grid: &Grid, values: &[f64], r: f64) -> Result<f64> {
    lebesgue_abs(grid, values.iter().map(|v| v.abs()), r)
}

fn lebesgue_abs(grid: &Grid, abs: impl Iterator<Item = f64>, r: f64) -> Result<f64> {
    if r.is_nan() || r < 1.0 {
        return Err(Error::param("r", format!("Lebesgue exponent must be >= 1, got {r}")));
    }
    if r.is_infinite() {
        return Ok(abs.fold(0.0, f64::max));
    }
    let sum: f64 = if r == 2.0 {
        abs.map(|a| a * a).sum()
    } else {
        abs.map(|a| a.powf(r)).sum()
    };
    Ok((grid.cell_volume() * sum).powf(1.0 / r))
}

/// `(h^n / M^n) Σ w(k) |F_k|²` with weight evaluated on `|2πξ|²`.
fn weighted_spectral_sq(f: &Field, weight: impl Fn(f64) -> f64, drop_nyquist: bool) -> f64 {
    let grid = f.grid();
    let spec = spectrum(f);
    let sum: f64 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| !(drop_nyquist && grid.is_nyquist(*k)))
        .map(|(k, v)| weight(grid.wavenumber_sq(k)) * v.norm_sqr())
        .sum();
    grid.cell_volume() / grid.len() as f64 * sum
}

/// Frequency-side `L²` norm, equal to [`lebesgue`] with `r = 2` by Plancherel.
pub fn frequency_l2_norm(f: &Field) -> f64 {
    weighted_spectral_sq(f, |_| 1.0, false).sqrt()
}

/// `‖f‖_{Ḣ^s}`. The Nyquist mode is dropped unless `s = 0`.
pub fn hom_sobolev(f: &Field, s: f64) -> f64 {
    if s == 0.0 {
        return frequency_l2_norm(f);
    }
    weighted_spectral_sq(
        f,
        |k2| if k2 == 0.0 { 0.0 } else { k2.powf(s) },
        true,
    )
    .sqrt()
}

/// `‖f‖_{H^s}`. The Nyquist mode is dropped unless `s = 0`.
pub fn inhom_sobolev(f: &Field, s: f64) -> f64 {
    if s == 0.0 {
        return frequency_l2_norm(f);
    }
    weighted_spectral_sq(f, |k2| (1.0 + k2).powf(s), true).sqrt()
}
