#![allow(dead_code)]

use nlslab::{Complex64, Field, Grid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random field whose spectrum is supported on `|k| <= kmax` lattice modes.
pub fn band_limited(grid: &Grid, kmax: f64, seed: u64) -> Field {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (i, z) in spec.iter_mut().enumerate() {
        let [a, b] = grid.axes(i);
        let ka = grid.mode(a) as f64;
        let kb = if grid.dim() == 2 { grid.mode(b) as f64 } else { 0.0 };
        let re: f64 = rng.gen_range(-1.0..1.0);
        let im: f64 = rng.gen_range(-1.0..1.0);
        if ka.hypot(kb) <= kmax && !grid.is_nyquist(i) {
            *z = Complex64::new(re, im);
        }
    }
    grid.inverse(&mut spec);
    Field::new(grid, spec).unwrap()
}

/// `A e^{-|x-c|²/w²} e^{i v x₁}`.
pub fn gaussian(grid: &Grid, amp: f64, width: f64, center: f64, v: f64) -> Field {
    Field::from_fn(grid, |[x, y]| {
        let r2 = (x - center).powi(2) + if grid.dim() == 2 { y * y } else { 0.0 };
        Complex64::from_polar(amp * (-r2 / (width * width)).exp(), v * x)
    })
    .unwrap()
}

pub fn max_diff(a: &Field, b: &Field) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn l2_diff(a: &Field, b: &Field) -> f64 {
    let s: f64 = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm_sqr()).sum();
    (s * a.grid().cell_volume()).sqrt()
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}
