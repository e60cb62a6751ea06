//! Mass, momentum and stress densities of a sampled state.

use crate::field::Field;
use crate::grid::Grid;
use num_complex::Complex64;

use crate::spectral::real_gradient;

/// Relative threshold below which `ρ` is treated as vacuum.
pub const RHO_CUTOFF: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct DensitySet {
    grid: Grid,
    rho: Vec<f64>,
    grad_rho: Vec<Vec<f64>>,
    pvec: Vec<Vec<f64>>,
    sigma: Vec<Vec<f64>>,
}

/// `ρ = ½|u|²`, `p_j = Im(ū ∂_j u)`, `σ_jk = 2 Re(∂_k u ∂_j ū)`, with spectral gradients.
pub fn densities(f: &Field) -> DensitySet {
    let grid = f.grid().clone();
    let n = grid.dim();
    // Real and imaginary parts are differentiated separately so that a real
    // field has an exactly real gradient and hence p ≡ 0.
    let re = real_gradient(&grid, &f.real_parts());
    let im: Vec<f64> = f.values().iter().map(|v| v.im).collect();
    let im = real_gradient(&grid, &im);
    let du: Vec<Field> = re
        .iter()
        .zip(&im)
        .map(|(a, b)| Field::from_parts(&grid, a.iter().zip(b).map(|(&x, &y)| Complex64::new(x, y)).collect()))
        .collect();
    let rho: Vec<f64> = f.values().iter().map(|v| 0.5 * v.norm_sqr()).collect();
    let pvec = du
        .iter()
        .map(|d| f.values().iter().zip(d.values()).map(|(u, du)| (u.conj() * du).im).collect())
        .collect();
    let mut sigma = Vec::with_capacity(n * n);
    for j in 0..n {
        for k in 0..n {
            sigma.push(
                du[k]
                    .values()
                    .iter()
                    .zip(du[j].values())
                    .map(|(a, b)| 2.0 * (a * b.conj()).re)
                    .collect(),
            );
        }
    }
    let grad_rho = real_gradient(&grid, &rho);
    DensitySet {
        grid,
        rho,
        grad_rho,
        pvec,
        sigma,
    }
}

impl DensitySet {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    /// `∂_j ρ`, computed spectrally from the sampled `ρ`.
    pub fn grad_rho(&self, j: usize) -> &[f64] {
        &self.grad_rho[j]
    }

    pub fn p(&self, j: usize) -> &[f64] {
        &self.pvec[j]
    }

    pub fn sigma(&self, j: usize, k: usize) -> &[f64] {
        &self.sigma[j * self.dim() + k]
    }

    /// `δ = 1e-10 · max ρ`.
    pub fn delta(&self) -> f64 {
        RHO_CUTOFF * self.rho.iter().cloned().fold(0.0, f64::max)
    }

    /// `(p_j p_k + ∂_jρ ∂_kρ)/ρ` where `ρ > δ`, `None` elsewhere.
    pub fn fluid_stress(&self, j: usize, k: usize) -> Vec<Option<f64>> {
        let delta = self.delta();
        (0..self.rho.len())
            .map(|i| {
                let r = self.rho[i];
                (r > delta).then(|| {
                    (self.pvec[j][i] * self.pvec[k][i] + self.grad_rho[j][i] * self.grad_rho[k][i]) / r
                })
            })
            .collect()
    }

    /// Largest `|σ_jk - σ_fluid|` over components and non-vacuum points,
    /// relative to `max |σ|`.
    pub fn stress_mismatch(&self) -> f64 {
        let n = self.dim();
        let scale = self.sigma.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for k in 0..n {
                for (s, fl) in self.sigma(j, k).iter().zip(self.fluid_stress(j, k)) {
                    if let Some(fl) = fl {
                        worst = worst.max((s - fl).abs());
                    }
                }
            }
        }
        worst / scale
    }

    /// `Σ_j ∂_j p_j`, spectrally.
    pub fn div_p(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rho.len()];
        for j in 0..self.dim() {
            let d = &real_gradient(&self.grid, &self.pvec[j])[j];
            for (o, v) in out.iter_mut().zip(d) {
                *o += v;
            }
        }
        out
    }
}
