//! Pointwise two-point kernels.

use crate::analysis::densities::DensitySet;
use crate::error::{Error, Result};

/// `η(x, y) = (|r|² I - r rᵀ)/|r|³` with `r = x - y`, row-major `n×n`.
pub fn commutator_kernel(x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::param("x", "points must have the same nonzero dimension"));
    }
    let n = x.len();
    let r: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let r2: f64 = r.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::param("y", "kernel is singular at x = y"));
    }
    let r3 = r2 * r2.sqrt();
    let mut eta = vec![0.0; n * n];
    for j in 0..n {
        for k in 0..n {
            let delta = if j == k { r2 } else { 0.0 };
            eta[j * n + k] = (delta - r[j] * r[k]) / r3;
        }
    }
    Ok(eta)
}

/// `J(x, y) = √(ρ(y)/ρ(x)) p(x) - √(ρ(x)/ρ(y)) p(y)` at flat grid indices.
pub fn two_point_momentum(d: &DensitySet, x: usize, y: usize) -> Result<Vec<f64>> {
    let rho = d.rho();
    let delta = d.delta();
    for &i in &[x, y] {
        if rho[i] <= delta {
            return Err(Error::DegenerateDensity { index: i });
        }
    }
    let q = (rho[y] / rho[x]).sqrt();
    Ok((0..d.dim()).map(|j| q * d.p(j)[x] - d.p(j)[y] / q).collect())
}

/// `½∫∫ Jᵀ η J` on the sub-lattice of every `stride`-th point per axis,
/// skipping vacuum points. Returns `(value, scale)` where `scale` is the same
/// sum with `η` replaced by its trace, so `value >= -tol·scale` is a
/// meaningful check.
pub fn p2_commutator_form(d: &DensitySet, stride: usize) -> Result<(f64, f64)> {
    let grid = d.grid();
    let stride = stride.max(1);
    let rho = d.rho();
    let delta = d.delta();
    let pts: Vec<usize> = (0..grid.len())
        .filter(|&i| {
            let [a, b] = grid.axes(i);
            a % stride == 0 && b % stride == 0 && rho[i] > delta
        })
        .collect();
    let cell = (grid.spacing() * stride as f64).powi(grid.dim() as i32);
    let n = grid.dim();
    let mut value = 0.0;
    let mut scale = 0.0;
    for &x in &pts {
        let px = grid.point(x);
        for &y in &pts {
            if x == y {
                continue;
            }
            let py = grid.point(y);
            let eta = commutator_kernel(&px[..n], &py[..n])?;
            let j = two_point_momentum(d, x, y)?;
            let r = ((px[0] - py[0]).powi(2) + (px[1] - py[1]).powi(2)).sqrt();
            for a in 0..n {
                scale += j[a] * j[a] / r;
                for b in 0..n {
                    value += j[a] * eta[a * n + b] * j[b];
                }
            }
        }
    }
    Ok((0.5 * value * cell * cell, 0.5 * scale * cell * cell))
}

/// Eigenvalues of a symmetric 2×2 matrix, ascending.
pub fn sym2_eigenvalues(m: &[f64]) -> [f64; 2] {
    let (a, b, d) = (m[0], 0.5 * (m[1] + m[2]), m[3]);
    let mean = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    [mean - rad, mean + rad]
}
