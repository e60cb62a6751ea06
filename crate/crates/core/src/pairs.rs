//! Direct sums over pairs of grid points, shared by the double integrals.

use crate::error::{Error, Result};
use crate::grid::{Grid, Vec2};
use crate::quadrature::pairwise_sum;

/// Default ceiling on the number of point pairs a direct double sum may visit.
pub const DEFAULT_PAIR_CAP: u128 = 400_000_000;

pub(crate) fn check_budget(pairs: u128, cap: u128) -> Result<()> {
    if pairs > cap {
        Err(Error::BudgetExceeded { pairs, cap })
    } else {
        Ok(())
    }
}

/// A grid point with its per-axis indices cached.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Site {
    pub idx: usize,
    pub ax: [usize; 2],
}

/// Sites where `keep(idx)` holds, in flat order.
pub(crate) fn sites(grid: &Grid, keep: impl Fn(usize) -> bool) -> Vec<Site> {
    (0..grid.len())
        .filter(|&i| keep(i))
        .map(|idx| Site {
            idx,
            ax: grid.axes(idx),
        })
        .collect()
}

/// Kernel values `k(x1 - x2)` for every lattice displacement of a non-periodic box.
pub(crate) struct DisplacementTable {
    side: usize,
    offset: isize,
    values: Vec<f64>,
}

impl DisplacementTable {
    pub fn new(grid: &Grid, k: impl Fn(Vec2) -> f64) -> Self {
        let m = grid.points();
        let side = 2 * m - 1;
        let offset = m as isize - 1;
        let h = grid.spacing();
        let rows = if grid.dim() == 2 { side } else { 1 };
        let mut values = Vec::with_capacity(side * rows);
        if grid.dim() == 1 {
            for a in 0..side {
                let d = (a as isize - offset) as f64 * h;
                values.push(k([d, 0.0]));
            }
        } else {
            for a in 0..side {
                let dx = (a as isize - offset) as f64 * h;
                for b in 0..side {
                    let dy = (b as isize - offset) as f64 * h;
                    values.push(k([dx, dy]));
                }
            }
        }
        DisplacementTable { side, offset, values }
    }

    /// Table `g(z, k(z))` built from an existing table without re-evaluating `k`.
    pub fn derive(&self, grid: &Grid, g: impl Fn(Vec2, f64) -> f64) -> Self {
        let h = grid.spacing();
        let two_d = self.values.len() != self.side;
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(flat, &v)| {
                let (a, b) = if two_d { (flat / self.side, flat % self.side) } else { (flat, self.offset as usize) };
                let z = [(a as isize - self.offset) as f64 * h, (b as isize - self.offset) as f64 * h];
                g(z, v)
            })
            .collect();
        DisplacementTable {
            side: self.side,
            offset: self.offset,
            values,
        }
    }

    #[inline]
    pub fn get(&self, s1: &Site, s2: &Site) -> f64 {
        let a = (s1.ax[0] as isize - s2.ax[0] as isize + self.offset) as usize;
        let b = (s1.ax[1] as isize - s2.ax[1] as isize + self.offset) as usize;
        if self.values.len() == self.side {
            self.values[a]
        } else {
            self.values[a * self.side + b]
        }
    }
}

/// `Σ_{i} Σ_{j} term(s_i, s_j)` with a fixed reduction order: each row is
/// summed sequentially and the row totals are combined pairwise.
pub(crate) fn double_sum(rows: &[Site], cols: &[Site], mut term: impl FnMut(&Site, &Site) -> f64) -> f64 {
    let totals: Vec<f64> = rows
        .iter()
        .map(|s1| {
            let mut acc = 0.0;
            for s2 in cols {
                acc += term(s1, s2);
            }
            acc
        })
        .collect();
    pairwise_sum(&totals)
}

/// `∫ |x - y|^{-3} dy` over the plane outside the box covered by the grid cells,
/// as seen from grid point `idx` (2D only). In polar coordinates about `x`
/// this is `∫ dθ / d(θ)` with `d` the distance to the box boundary along the ray.
pub(crate) fn exterior_inverse_cube(grid: &Grid, idx: usize) -> Result<f64> {
    let h = grid.spacing();
    let lo = -0.5 * grid.length() - 0.5 * h;
    let hi = 0.5 * grid.length() - 0.5 * h;
    let [x, y] = grid.point(idx);
    let ray = |theta: f64| {
        let (s, c) = theta.sin_cos();
        let tx = if c > 0.0 { (hi - x) / c } else if c < 0.0 { (lo - x) / c } else { f64::INFINITY };
        let ty = if s > 0.0 { (hi - y) / s } else if s < 0.0 { (lo - y) / s } else { f64::INFINITY };
        1.0 / tx.min(ty)
    };
    // split at the corner directions, where the integrand has kinks
    let mut cuts: Vec<f64> = [(hi, hi), (lo, hi), (lo, lo), (hi, lo)]
        .iter()
        .map(|&(cx, cy)| (cy - y).atan2(cx - x).rem_euclid(2.0 * std::f64::consts::PI))
        .collect();
    cuts.push(0.0);
    cuts.push(2.0 * std::f64::consts::PI);
    cuts.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += crate::quadrature::integrate(ray, w[0], w[1], 1e-13)?.value;
    }
    Ok(total)
}
