//! One-dimensional adaptive quadrature and order-stable summation.

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [0, 1] (positive half) with Kronrod and embedded
// 7-point Gauss weights.
const XK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One G7–K15 panel: Kronrod estimate and `|K - G|`.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XK[i];
        let s = f(c - dx) + f(c + dx);
        k += WK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Panels are bisected (largest error first) until the summed error estimate
/// is below `tol` or `max_panels` is reached, in which case an error is returned.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    integrate_with_limit(f, a, b, tol, 4000)
}

pub fn integrate_with_limit(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_panels: usize,
) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut panels = vec![(a, b, v, e)];
    let mut evaluations = 15;
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        if total_err <= tol {
            break;
        }
        if panels.len() >= max_panels {
            return Err(Error::param(
                "quadrature",
                format!("no convergence on [{a}, {b}]: error {total_err:e} > {tol:e}"),
            ));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (i, p)| if p.3 > acc.1 { (i, p.3) } else { acc });
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        evaluations += 30;
        panels.push((pa, mid, v1, e1));
        panels.push((mid, pb, v2, e2));
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let vals: Vec<f64> = panels.iter().map(|p| p.2).collect();
    Ok(Quadrature {
        value: pairwise_sum(&vals),
        error: panels.iter().map(|p| p.3).sum(),
        evaluations,
    })
}

/// Pairwise (tree) summation; the result depends only on the slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 32;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Composite trapezoid rule on uniformly spaced samples.
pub fn trapezoid(values: &[f64], step: f64) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::InsufficientSnapshots(values.len()));
    }
    let n = values.len();
    let interior: f64 = values[1..n - 1].iter().sum();
    Ok(step * (0.5 * (values[0] + values[n - 1]) + interior))
}

/// Composite Simpson rule; needs an odd number of samples (even panel count).
pub fn simpson(values: &[f64], step: f64) -> Result<f64> {
    let n = values.len();
    if n < 3 || n % 2 == 0 {
        return Err(Error::InsufficientSnapshots(n));
    }
    let mut s = values[0] + values[n - 1];
    for (i, v) in values.iter().enumerate().take(n - 1).skip(1) {
        s += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    Ok(s * step / 3.0)
}
