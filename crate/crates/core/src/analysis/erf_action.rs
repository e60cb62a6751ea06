//! The one-dimensional action smoothed by the error function and the four
//! terms of its time derivative.
//!
//! With `g_ε(z) = e^{-z²/ε²}/(√π ε)` and the odd kernel `K = ½ erf(z/ε)`
//! (so `K' = g_ε`), the action is `M = ∫∫ p(x) K(x-y) ρ(y)` and along a
//! solution `dM/dt = P1 + P2 + P3 + P4` with
//!
//! * `P1 = ⟨G_ε ρ, ρ_x²/ρ⟩`
//! * `P2 = ½∫∫ g_ε(x-y) (√(ρ(y)/ρ(x)) p(x) - √(ρ(x)/ρ(y)) p(y))²`
//! * `P3 = ∫ ρ_x (G_ε ρ)_x`
//! * `P4 = c_p ⟨G_ε ρ, ρ^{(p+1)/2}⟩`, `c_p = 2^{(p+1)/2}(p-1)/(p+1)`
//!
//! where `G_ε` is convolution with `g_ε` and `c_p ρ^{(p+1)/2}` is the pressure in
//! the momentum law.

use std::f64::consts::PI;

use crate::analysis::densities::{densities, DensitySet};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::physical_frequency;
use crate::pairs::{self, check_budget, double_sum, DisplacementTable, DEFAULT_PAIR_CAP};
use crate::spectral::heat_smooth;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErfActionTerms {
    pub m: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub p4: f64,
    pub epsilon: f64,
}

impl ErfActionTerms {
    pub fn derivative(&self) -> f64 {
        self.p1 + self.p2 + self.p3 + self.p4
    }

    pub fn scale(&self) -> f64 {
        [self.p1, self.p2, self.p3, self.p4].iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Smallest term relative to the largest.
    pub fn min_relative(&self) -> f64 {
        let s = self.scale();
        if s == 0.0 {
            return 0.0;
        }
        [self.p1, self.p2, self.p3, self.p4].iter().cloned().fold(f64::INFINITY, f64::min) / s
    }
}

/// Pressure coefficient `2^{(p+1)/2}(p-1)/(p+1)`.
pub fn pressure_coefficient(p: f64) -> f64 {
    2f64.powf(0.5 * (p + 1.0)) * (p - 1.0) / (p + 1.0)
}

fn check(f: &Field, epsilon: f64) -> Result<()> {
    let grid = f.grid();
    if grid.dim() != 1 {
        return Err(Error::InvalidGrid("the erf action is one-dimensional".into()));
    }
    if !(epsilon.is_finite() && epsilon >= 2.0 * grid.spacing() * (1.0 - 1e-12)) {
        return Err(Error::param(
            "epsilon",
            format!("must be at least 2h = {}, got {epsilon}", 2.0 * grid.spacing()),
        ));
    }
    Ok(())
}

/// `M = ∫∫ p(x) K(x-y) ρ(y)` by a direct sum over the support of `ρ`.
pub fn erf_action(f: &Field, epsilon: f64) -> Result<f64> {
    check(f, epsilon)?;
    erf_action_from(&densities(f), epsilon, DEFAULT_PAIR_CAP)
}

pub fn erf_action_from(d: &DensitySet, epsilon: f64, cap: u128) -> Result<f64> {
    let grid = d.grid();
    let rho = d.rho();
    let p = d.p(0);
    let cut = 1e-30 * rho.iter().cloned().fold(0.0, f64::max);
    let sup = pairs::sites(grid, |i| rho[i] > cut);
    check_budget(sup.len() as u128 * sup.len() as u128, cap)?;
    let kernel = DisplacementTable::new(grid, |z| 0.5 * libm::erf(z[0] / epsilon));
    let h = grid.spacing();
    Ok(double_sum(&sup, &sup, |a, b| p[a.idx] * kernel.get(a, b) * rho[b.idx]) * h * h)
}

pub fn erf_action_terms(f: &Field, p: f64, epsilon: f64) -> Result<ErfActionTerms> {
    check(f, epsilon)?;
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::param("p", format!("must be > 1, got {p}")));
    }
    let d = densities(f);
    let grid = f.grid();
    let h = grid.spacing();
    let rho = d.rho();
    let rho_x = d.grad_rho(0);
    let mom = d.p(0);
    let delta = d.delta();
    let g_rho = heat_smooth(&Field::from_real(grid, rho), epsilon).real_parts();

    let mut p1 = 0.0;
    let mut p4 = 0.0;
    let e = 0.5 * (p + 1.0);
    for i in 0..rho.len() {
        if rho[i] > delta {
            p1 += rho_x[i] * rho_x[i] / rho[i] * g_rho[i];
        }
        p4 += rho[i].powf(e) * g_rho[i];
    }
    p1 *= h;
    p4 *= h * pressure_coefficient(p);

    let spec = crate::spectral::spectrum(&Field::from_real(grid, rho));
    let e2 = epsilon * epsilon;
    let p3 = spec
        .iter()
        .enumerate()
        .filter(|(k, _)| !grid.is_nyquist(*k))
        .map(|(k, v)| {
            let kk = physical_frequency(grid.frequency(k)[0]).powi(2);
            kk * (-0.25 * e2 * kk).exp() * v.norm_sqr()
        })
        .sum::<f64>()
        * h
        / grid.len() as f64;

    let band = (12.0 * epsilon / h).ceil() as usize;
    let norm = 1.0 / (PI.sqrt() * epsilon);
    let weights: Vec<f64> = (0..=band)
        .map(|k| {
            let z = k as f64 * h / epsilon;
            norm * (-z * z).exp()
        })
        .collect();
    let n = rho.len();
    let mut p2 = 0.0;
    for i in 0..n {
        if rho[i] <= delta {
            continue;
        }
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(n - 1);
        let mut row = 0.0;
        for j in lo..=hi {
            if j == i || rho[j] <= delta {
                continue;
            }
            let q = (rho[j] / rho[i]).sqrt();
            let jv = q * mom[i] - mom[j] / q;
            row += weights[i.abs_diff(j)] * jv * jv;
        }
        p2 += row;
    }
    p2 *= 0.5 * h * h;

    let m = erf_action_from(&d, epsilon, DEFAULT_PAIR_CAP)?;
    Ok(ErfActionTerms {
        m,
        p1,
        p2,
        p3,
        p4,
        epsilon,
    })
}

/// `¼‖∂_x|u|²‖²_{L²}`, the small-ε limit of `P1` and `P3`.
pub fn p1_limit(f: &Field) -> f64 {
    let d = densities(f);
    d.grad_rho(0).iter().map(|v| v * v).sum::<f64>() * f.grid().spacing()
}

/// `(p-1)/(2(p+1)) ‖u‖^{p+3}_{L^{p+3}}`, the small-ε limit of `P4`.
pub fn p4_limit(f: &Field, p: f64) -> f64 {
    let e = 0.5 * (p + 3.0);
    let s: f64 = f.values().iter().map(|v| v.norm_sqr().powf(e)).sum();
    (p - 1.0) / (2.0 * (p + 1.0)) * s * f.grid().spacing()
}
