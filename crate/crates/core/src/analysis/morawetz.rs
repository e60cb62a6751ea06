//! Morawetz actions: the one-particle action and its tensor-product version.

use crate::analysis::densities::{densities, DensitySet};
use crate::error::Result;
use crate::field::Field;
use crate::grid::Grid;
use crate::pairs::{self, check_budget, double_sum, DisplacementTable, Site, DEFAULT_PAIR_CAP};
use crate::weights::RadialWeight;

/// `M_a = 2∫ ∇a · Im(ū∇u)` with `∇a = (x/|x|) a_r(|x|)`; the origin contributes 0.
pub fn morawetz_action(f: &Field, w: &RadialWeight) -> f64 {
    morawetz_action_from(&densities(f), w)
}

pub fn morawetz_action_from(d: &DensitySet, w: &RadialWeight) -> f64 {
    let grid = d.grid();
    let mut total = 0.0;
    for i in 0..grid.len() {
        let x = grid.point(i);
        let r = x[0].hypot(x[1]);
        if r == 0.0 {
            continue;
        }
        let ar = w.a_r(r) / r;
        let mut dot = 0.0;
        for j in 0..grid.dim() {
            dot += x[j] * d.p(j)[i];
        }
        total += ar * dot;
    }
    2.0 * grid.cell_volume() * total
}

/// Kernel tables `a_r(|z|) z_j/|z|` for each axis.
pub(crate) fn direction_tables(grid: &Grid, w: &RadialWeight) -> Vec<DisplacementTable> {
    let radial = DisplacementTable::new(grid, |z| {
        let r = z[0].hypot(z[1]);
        if r == 0.0 {
            0.0
        } else {
            w.a_r(r) / r
        }
    });
    (0..grid.dim()).map(|j| radial.derive(grid, |z, v| z[j] * v)).collect()
}

fn support(d: &DensitySet) -> Vec<Site> {
    let rho = d.rho();
    let cut = 1e-30 * rho.iter().cloned().fold(0.0, f64::max);
    pairs::sites(d.grid(), |i| rho[i] > cut)
}

/// `M^⊗2 = ∫∫ a_r(|x1-x2|) ẑ · [p(x1)ρ(x2) - p(x2)ρ(x1)]`, `ẑ = (x1-x2)/|x1-x2|`.
///
/// Evaluated as `2 Σ Σ a_r ẑ · p(x1) ρ(x2)` over the support of `ρ`, which is
/// the same sum after swapping `x1` and `x2` in the second half.
pub fn interaction_action(f: &Field, w: &RadialWeight) -> Result<f64> {
    interaction_action_from(&densities(f), w, DEFAULT_PAIR_CAP)
}

pub fn interaction_action_from(d: &DensitySet, w: &RadialWeight, cap: u128) -> Result<f64> {
    let tables = direction_tables(d.grid(), w);
    interaction_with_tables(d, &tables, cap)
}

pub(crate) fn interaction_with_tables(d: &DensitySet, tables: &[DisplacementTable], cap: u128) -> Result<f64> {
    let sup = support(d);
    check_budget(sup.len() as u128 * sup.len() as u128, cap)?;
    let rho = d.rho();
    let hv = d.grid().cell_volume();
    let mut total = 0.0;
    for (j, table) in tables.iter().enumerate() {
        let p = d.p(j);
        total += double_sum(&sup, &sup, |a, b| p[a.idx] * table.get(a, b) * rho[b.idx]);
    }
    Ok(2.0 * total * hv * hv)
}

/// Commutator evaluation of the `a = |x|` interaction action:
/// `2⟨Xρ | p⟩` with `Xρ(x) = x (K*ρ)(x) - (K*(yρ))(x)` and `K(z) = 1/|z|`.
///
/// The convolutions are formed first and paired with `p` afterwards, so the
/// order of summation differs from [`interaction_action`].
pub fn interaction_commutator_form(f: &Field) -> Result<f64> {
    interaction_commutator_form_from(&densities(f), DEFAULT_PAIR_CAP)
}

pub fn interaction_commutator_form_from(d: &DensitySet, cap: u128) -> Result<f64> {
    let grid = d.grid();
    let n = grid.dim();
    let sup = support(d);
    check_budget(sup.len() as u128 * sup.len() as u128, cap)?;
    let rho = d.rho();
    let hv = grid.cell_volume();
    let inv = DisplacementTable::new(grid, |z| {
        let r = z[0].hypot(z[1]);
        if r == 0.0 {
            0.0
        } else {
            1.0 / r
        }
    });
    let mut total = 0.0;
    for s1 in &sup {
        let x = grid.point(s1.idx);
        let mut k_rho = 0.0;
        let mut k_y_rho = [0.0; 2];
        for s2 in &sup {
            let kv = inv.get(s1, s2) * rho[s2.idx];
            k_rho += kv;
            let y = grid.point(s2.idx);
            k_y_rho[0] += kv * y[0];
            k_y_rho[1] += kv * y[1];
        }
        for j in 0..n {
            let x_rho = x[j] * k_rho - k_y_rho[j];
            total += x_rho * d.p(j)[s1.idx];
        }
    }
    Ok(2.0 * total * hv * hv)
}
