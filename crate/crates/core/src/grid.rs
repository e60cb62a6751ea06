//! Periodic box discretisation and the discrete Fourier transform contract.
//!
//! Sample points are `x_j = -L/2 + j h` per axis with `h = L/M`. Frequencies are
//! measured in cycles per unit length, `ξ_k = k / L` with `k` the signed mode
//! index in FFT order (`0, 1, …, M/2-1, -M/2, …, -1`). The index `-M/2` is the
//! Nyquist mode. Every symbol is evaluated through [`physical_frequency`], so
//! `-Δ` corresponds to `(2π|ξ|)^2` exactly.
//!
//! The forward transform is the unnormalised DFT and the inverse divides by
//! `M^n`; with cell volume `h^n` and dual cell `L^{-n}` this pairing satisfies
//! Plancherel exactly (see [`crate::norms::frequency_l2_norm`]).

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Spatial position or frequency vector; the second component is unused in 1D.
pub type Vec2 = [f64; 2];

/// Angular frequency `2πξ` for a frequency `ξ` in cycles per unit length.
#[inline]
pub fn physical_frequency(xi: f64) -> f64 {
    2.0 * PI * xi
}

#[derive(Clone)]
pub struct Grid {
    inner: Arc<GridInner>,
}

struct GridInner {
    dim: usize,
    length: f64,
    points: usize,
    spacing: f64,
    modes: Vec<i64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Build a periodic grid with `points` samples per axis on a box of side `length`.
pub fn make_grid(dim: usize, length: f64, points: usize) -> Result<Grid> {
    Grid::new(dim, length, points)
}

impl Grid {
    pub fn new(dim: usize, length: f64, points: usize) -> Result<Self> {
        if !(dim == 1 || dim == 2) {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("box length must be positive, got {length}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be a power of two >= 8, got {points}"
            )));
        }
        let half = points as i64 / 2;
        let modes = (0..points as i64)
            .map(|k| if k < half { k } else { k - points as i64 })
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        Ok(Grid {
            inner: Arc::new(GridInner {
                dim,
                length,
                points,
                spacing: length / points as f64,
                modes,
                forward,
                inverse,
            }),
        })
    }

    pub fn dim(&self) -> usize {
        self.inner.dim
    }

    pub fn length(&self) -> f64 {
        self.inner.length
    }

    pub fn points(&self) -> usize {
        self.inner.points
    }

    pub fn spacing(&self) -> f64 {
        self.inner.spacing
    }

    /// Total number of samples, `M^n`.
    pub fn len(&self) -> usize {
        self.inner.points.pow(self.inner.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cell volume `h^n` used by every Riemann sum.
    pub fn cell_volume(&self) -> f64 {
        self.inner.spacing.powi(self.inner.dim as i32)
    }

    /// Coordinate of sample `j` along one axis.
    #[inline]
    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.inner.length + j as f64 * self.inner.spacing
    }

    /// Split a flat index into per-axis indices (row-major, axis 0 slowest).
    #[inline]
    pub fn axes(&self, idx: usize) -> [usize; 2] {
        if self.inner.dim == 1 {
            [idx, 0]
        } else {
            [idx / self.inner.points, idx % self.inner.points]
        }
    }

    #[inline]
    pub fn point(&self, idx: usize) -> Vec2 {
        let [i, j] = self.axes(idx);
        if self.inner.dim == 1 {
            [self.coordinate(i), 0.0]
        } else {
            [self.coordinate(i), self.coordinate(j)]
        }
    }

    /// Signed mode index along one axis for FFT position `k`.
    #[inline]
    pub fn mode(&self, k: usize) -> i64 {
        self.inner.modes[k]
    }

    /// Whether FFT position `k` along an axis is the Nyquist mode.
    #[inline]
    pub fn is_nyquist_axis(&self, k: usize) -> bool {
        k == self.inner.points / 2
    }

    /// Whether any axis of the flat spectral index sits on the Nyquist mode.
    #[inline]
    pub fn is_nyquist(&self, idx: usize) -> bool {
        let [i, j] = self.axes(idx);
        self.is_nyquist_axis(i) || (self.inner.dim == 2 && self.is_nyquist_axis(j))
    }

    /// Frequency vector (cycles per unit length) of a flat spectral index.
    #[inline]
    pub fn frequency(&self, idx: usize) -> Vec2 {
        let [i, j] = self.axes(idx);
        let l = self.inner.length;
        if self.inner.dim == 1 {
            [self.mode(i) as f64 / l, 0.0]
        } else {
            [self.mode(i) as f64 / l, self.mode(j) as f64 / l]
        }
    }

    /// Squared angular wavenumber `|2πξ|^2` of a flat spectral index.
    #[inline]
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        let [a, b] = self.frequency(idx);
        let (ka, kb) = (physical_frequency(a), physical_frequency(b));
        ka * ka + kb * kb
    }

    /// Largest resolved frequency per axis, `M / (2L)` cycles per unit length.
    pub fn nyquist_frequency(&self) -> f64 {
        self.inner.points as f64 / (2.0 * self.inner.length)
    }

    /// Smallest nonzero frequency, `1/L`.
    pub fn fundamental_frequency(&self) -> f64 {
        1.0 / self.inner.length
    }

    /// Same lattice on a box scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Grid> {
        Grid::new(self.inner.dim, self.inner.length * factor, self.inner.points)
    }

    /// Unnormalised forward DFT in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.forward);
    }

    /// Inverse DFT in place, normalised by `M^n` so that it undoes [`Grid::forward`].
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inner.inverse);
        let scale = 1.0 / self.len() as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    fn transform(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        assert_eq!(data.len(), self.len(), "buffer length does not match grid");
        // rustfft transforms every contiguous chunk of length M
        plan.process(data);
        if self.inner.dim == 2 {
            transpose_square(data, self.inner.points);
            plan.process(data);
            transpose_square(data, self.inner.points);
        }
    }
}

fn transpose_square(data: &mut [Complex64], m: usize) {
    for i in 0..m {
        for j in (i + 1)..m {
            data.swap(i * m + j, j * m + i);
        }
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.inner.dim == other.inner.dim
                && self.inner.points == other.inner.points
                && self.inner.length == other.inner.length)
    }
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dim", &self.inner.dim)
            .field("length", &self.inner.length)
            .field("points", &self.inner.points)
            .finish()
    }
}
