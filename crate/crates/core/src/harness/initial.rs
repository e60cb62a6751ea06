//! Initial data from an [`InitialSpec`].

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::harness::config::InitialSpec;

fn envelope(x: [f64; 2], c: [f64; 2], w: f64, dim: usize) -> f64 {
    let r2: f64 = (0..dim).map(|j| (x[j] - c[j]).powi(2)).sum();
    (-r2 / (w * w)).exp()
}

fn padded(v: &[f64]) -> [f64; 2] {
    [v.first().copied().unwrap_or(0.0), v.get(1).copied().unwrap_or(0.0)]
}

fn normalise_sup(mut values: Vec<Complex64>, amplitude: f64) -> Vec<Complex64> {
    let sup = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if sup > 0.0 {
        let c = amplitude / sup;
        for z in &mut values {
            *z *= c;
        }
    }
    values
}

/// Sample the initial datum on `grid`. Random kinds draw from a ChaCha8
/// stream seeded by `seed`.
pub fn initial_field(grid: &Grid, spec: &InitialSpec, seed: u64) -> Result<Field> {
    let dim = grid.dim();
    let points: Vec<[f64; 2]> = (0..grid.len()).map(|i| grid.point(i)).collect();
    let values: Vec<Complex64> = match spec {
        InitialSpec::Gaussian {
            amplitude,
            width,
            center,
            velocity,
        } => {
            let (c, v) = (padded(center), padded(velocity));
            points
                .iter()
                .map(|&x| {
                    let phase: f64 = (0..dim).map(|j| v[j] * x[j]).sum();
                    Complex64::from_polar(amplitude * envelope(x, c, *width, dim), phase)
                })
                .collect()
        }
        InitialSpec::TwoBump {
            amplitude,
            width,
            separation,
            speed,
        } => {
            let c1 = [-separation / 2.0, 0.0];
            let c2 = [separation / 2.0, 0.0];
            points
                .iter()
                .map(|&x| {
                    Complex64::from_polar(amplitude * envelope(x, c1, *width, dim), speed * x[0])
                        + Complex64::from_polar(amplitude * envelope(x, c2, *width, dim), -speed * x[0])
                })
                .collect()
        }
        InitialSpec::RandomPhase {
            amplitude,
            width,
            modes,
            bandwidth,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let waves: Vec<([f64; 2], Complex64)> = (0..*modes)
                .map(|_| {
                    let r = bandwidth * rng.gen::<f64>().powf(1.0 / dim as f64);
                    let theta = 2.0 * PI * rng.gen::<f64>();
                    let xi = if dim == 1 {
                        [if rng.gen::<bool>() { r } else { -r }, 0.0]
                    } else {
                        [r * theta.cos(), r * theta.sin()]
                    };
                    let c = Complex64::from_polar(1.0, 2.0 * PI * rng.gen::<f64>());
                    (xi, c)
                })
                .collect();
            let raw = points
                .iter()
                .map(|&x| {
                    let s: Complex64 = waves
                        .iter()
                        .map(|(xi, c)| {
                            let arg: f64 = (0..dim).map(|j| 2.0 * PI * xi[j] * x[j]).sum();
                            c * Complex64::from_polar(1.0, arg)
                        })
                        .sum();
                    s * envelope(x, [0.0; 2], *width, dim)
                })
                .collect();
            normalise_sup(raw, *amplitude)
        }
        InitialSpec::PowerLaw {
            amplitude,
            width,
            exponent,
            kmax,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let kmax = *kmax as f64;
            let mut spec = vec![Complex64::new(0.0, 0.0); grid.len()];
            for (i, z) in spec.iter_mut().enumerate() {
                let [a, b] = grid.axes(i);
                let ka = grid.mode(a) as f64;
                let kb = if dim == 2 { grid.mode(b) as f64 } else { 0.0 };
                let k = ka.hypot(kb);
                // draw for every mode so the stream does not depend on kmax
                let phase = 2.0 * PI * rng.gen::<f64>();
                if k <= kmax && !grid.is_nyquist(i) {
                    *z = Complex64::from_polar((1.0 + k).powf(-exponent), phase);
                }
            }
            grid.inverse(&mut spec);
            let raw = spec
                .iter()
                .zip(&points)
                .map(|(z, &x)| z * envelope(x, [0.0; 2], *width, dim))
                .collect();
            normalise_sup(raw, *amplitude)
        }
    };
    let f = Field::new(grid, values)?;
    if !f.is_finite() {
        return Err(Error::param("initial", "initial data is not finite"));
    }
    Ok(f)
}
