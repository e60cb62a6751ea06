//! Radial Morawetz weights: `a(x) = |x|` and the regularised weight built
//! from `Δa` with inner scale `r0`.
//!
//! For the regularised weight `Δa(r) = (1 + ln(r0/r))/r0` below `r0` and `1/r`
//! above; `a_r` is recovered as `(1/r)∫₀^r sΔa(s) ds` by adaptive quadrature
//! and `a = ∫₀^r a_r`. Beyond `r0` this gives `a_r = 1 - r0/(4r)`, not `1`.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::pairs::{self, check_budget, double_sum, DisplacementTable, DEFAULT_PAIR_CAP};
use crate::quadrature::integrate;

const QUAD_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WeightKind {
    Abs,
    R0(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct RadialWeight {
    kind: WeightKind,
    label: String,
}

/// `a(r) = r`.
pub fn weight_abs() -> RadialWeight {
    RadialWeight {
        kind: WeightKind::Abs,
        label: "abs".into(),
    }
}

pub fn weight_r0(r0: f64) -> Result<RadialWeight> {
    if !(r0.is_finite() && r0 > 0.0) {
        return Err(Error::param("r0", format!("must be > 0, got {r0}")));
    }
    Ok(RadialWeight {
        kind: WeightKind::R0(r0),
        label: format!("r0={r0}"),
    })
}

impl RadialWeight {
    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Inner scale, `0` for the `|x|` weight.
    pub fn r0(&self) -> f64 {
        match self.kind {
            WeightKind::Abs => 0.0,
            WeightKind::R0(r0) => r0,
        }
    }

    /// Two-dimensional `Δa(r)` in closed form.
    pub fn lap_a(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Abs => 1.0 / r,
            WeightKind::R0(r0) => {
                if r < r0 {
                    (1.0 + (r0 / r).ln()) / r0
                } else {
                    1.0 / r
                }
            }
        }
    }

    /// `d/dr Δa(r)` in closed form (2D).
    pub fn lap_a_prime(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Abs => -1.0 / (r * r),
            WeightKind::R0(r0) => {
                if r < r0 {
                    -1.0 / (r0 * r)
                } else {
                    -1.0 / (r * r)
                }
            }
        }
    }

    /// `Δa + rΔa′`, equal to `ln(r0/r)/r0` below `r0` and `0` above.
    pub fn lap_identity(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Abs => 0.0,
            WeightKind::R0(r0) => {
                if r < r0 {
                    (r0 / r).ln() / r0
                } else {
                    0.0
                }
            }
        }
    }

    /// `∫₀^r sΔa(s) ds`, split at `r0`. The tolerance shrinks with `r` so
    /// that `a_r = flux/r` and `a_rr = q/r²` keep absolute accuracy.
    fn flux(&self, r: f64) -> Result<f64> {
        let r0 = self.r0();
        let tol = QUAD_TOL * r.min(r * r);
        let f = |s: f64| if s > 0.0 { s * self.lap_a(s) } else { 0.0 };
        let inner = integrate(f, 0.0, r.min(r0), tol)?.value;
        let outer = if r > r0 {
            integrate(f, r0, r, tol)?.value
        } else {
            0.0
        };
        Ok(inner + outer)
    }

    /// Radial derivative `a_r`.
    pub fn a_r(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Abs => 1.0,
            WeightKind::R0(_) => {
                if r <= 0.0 {
                    0.0
                } else {
                    self.flux(r).expect("quadrature of a smooth integrand") / r
                }
            }
        }
    }

    /// `a(r) = ∫₀^r a_r`.
    pub fn a(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Abs => r,
            WeightKind::R0(r0) => {
                if r <= 0.0 {
                    return 0.0;
                }
                let g = |s: f64| self.a_r(s);
                let inner = integrate(g, 0.0, r.min(r0), 1e-11).expect("quadrature").value;
                let outer = if r > r0 {
                    integrate(g, r0, r, 1e-11).expect("quadrature").value
                } else {
                    0.0
                };
                inner + outer
            }
        }
    }

    /// `q(r) = ∫₀^r [2Δa(r) - Δa(s)] s ds`.
    pub fn q(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Abs => 0.0,
            WeightKind::R0(_) => {
                if r <= 0.0 {
                    return 0.0;
                }
                let lap_r = self.lap_a(r);
                r * r * lap_r - self.flux(r).expect("quadrature")
            }
        }
    }

    /// `a_rr = q/r²`.
    pub fn a_rr(&self, r: f64) -> f64 {
        match self.kind {
            WeightKind::Abs => 0.0,
            WeightKind::R0(_) => {
                if r <= 0.0 {
                    0.0
                } else {
                    self.q(r) / (r * r)
                }
            }
        }
    }

    /// Laplacian of the radial function in dimension `dim`.
    pub fn laplacian(&self, r: f64, dim: usize) -> f64 {
        if dim == 2 {
            return self.lap_a(r);
        }
        self.a_rr(r) + (dim as f64 - 1.0) * self.a_r(r) / r
    }

    /// Tabulate `(r, a, a_r, Δa, a_rr)` as CSV.
    pub fn write_table<W: Write>(&self, radii: &[f64], mut out: W) -> Result<()> {
        writeln!(out, "r,a,a_r,lap_a,a_rr")?;
        for &r in radii {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                r,
                self.a(r),
                self.a_r(r),
                self.lap_a(r),
                self.a_rr(r)
            )?;
        }
        Ok(())
    }
}

/// `n` log-spaced radii in `[r_min, r_max]`.
pub fn log_spaced(r_min: f64, r_max: f64, n: usize) -> Vec<f64> {
    let (a, b) = (r_min.ln(), r_max.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n.max(2) - 1) as f64).exp())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvexitySample {
    pub r: f64,
    pub q: f64,
    pub a_r: f64,
    pub a_rr: f64,
    pub lap_a: f64,
    pub lap_identity: f64,
}

#[derive(Clone, Debug)]
pub struct ConvexityReport {
    pub samples: Vec<ConvexitySample>,
    pub min_q: f64,
    pub min_a_rr: f64,
    pub max_a_r: f64,
    pub scale: f64,
    pub passed: bool,
}

/// Evaluate `q`, `a_rr` and the `Δa + rΔa′` identity on the given radii.
/// Passes iff `q >= -1e-12·scale` everywhere, with `scale = max |r²Δa|`.
pub fn convexity_certificate(w: &RadialWeight, radii: &[f64]) -> ConvexityReport {
    let samples: Vec<ConvexitySample> = radii
        .iter()
        .map(|&r| ConvexitySample {
            r,
            q: w.q(r),
            a_r: w.a_r(r),
            a_rr: w.a_rr(r),
            lap_a: w.lap_a(r),
            lap_identity: w.lap_identity(r),
        })
        .collect();
    let min_q = samples.iter().map(|s| s.q).fold(f64::INFINITY, f64::min);
    let min_a_rr = samples.iter().map(|s| s.a_rr).fold(f64::INFINITY, f64::min);
    let max_a_r = samples.iter().map(|s| s.a_r).fold(f64::NEG_INFINITY, f64::max);
    let scale = samples
        .iter()
        .map(|s| (s.r * s.r * s.lap_a).abs())
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    ConvexityReport {
        passed: samples.iter().all(|s| s.q >= -1e-12 * scale),
        samples,
        min_q,
        min_a_rr,
        max_a_r,
        scale,
    }
}

fn check_pairing_inputs(w: &RadialWeight, grid: &Grid, rho1: &[f64], rho2: &[f64]) -> Result<f64> {
    let r0 = match w.kind {
        WeightKind::R0(r0) => r0,
        WeightKind::Abs => return Err(Error::param("weight", "bilaplacian pairing needs an r0 weight")),
    };
    if grid.dim() != 2 {
        return Err(Error::InvalidGrid("bilaplacian pairing is two-dimensional".into()));
    }
    if rho1.len() != grid.len() || rho2.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    Ok(r0)
}

fn tail_kernel(grid: &Grid, r0: f64) -> DisplacementTable {
    DisplacementTable::new(grid, |d| {
        let s = d[0].hypot(d[1]);
        if s >= r0 {
            1.0 / (s * s * s)
        } else {
            0.0
        }
    })
}

/// `∫∫(-ΔΔa)(|x1-x2|) ρ1(x1) ρ2(x2) = (2π/r0)∫ρ1ρ2 - ∫∫ w(|x1-x2|) ρ1 ρ2`
/// with `w(s) = s^{-3}` for `s >= r0`. Accurate once `r0` spans several cells.
pub fn bilaplacian_pairing(w: &RadialWeight, grid: &Grid, rho1: &[f64], rho2: &[f64]) -> Result<f64> {
    bilaplacian_pairing_capped(w, grid, rho1, rho2, DEFAULT_PAIR_CAP)
}

pub fn bilaplacian_pairing_capped(
    w: &RadialWeight,
    grid: &Grid,
    rho1: &[f64],
    rho2: &[f64],
    cap: u128,
) -> Result<f64> {
    let r0 = check_pairing_inputs(w, grid, rho1, rho2)?;
    let s1 = pairs::sites(grid, |i| rho1[i] != 0.0);
    let s2 = pairs::sites(grid, |i| rho2[i] != 0.0);
    check_budget(s1.len() as u128 * s2.len() as u128, cap)?;
    let hv = grid.cell_volume();
    let local: f64 = rho1.iter().zip(rho2).map(|(a, b)| a * b).sum::<f64>() * hv;
    let table = tail_kernel(grid, r0);
    let tail = double_sum(&s1, &s2, |a, b| table.get(a, b) * rho1[a.idx] * rho2[b.idx]) * hv * hv;
    Ok(2.0 * PI / r0 * local - tail)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rearranged {
    /// `½∫∫ (ρ(x1) - ρ(x2))² w(|x1-x2|)` over the box.
    pub pair_term: f64,
    /// `∫ ρ(x)² D(x)` with `D(x) = 2π/r0 - Σ_y w(|x-y|) h²` the part of the
    /// kernel mass not seen by the lattice sum.
    pub self_term: f64,
    /// `∫ ρ(x)² W(x)` with `W(x)` the continuum kernel mass outside the box.
    pub exterior_term: f64,
}

impl Rearranged {
    /// Equals [`bilaplacian_pairing`] with `ρ1 = ρ2 = ρ` up to rounding.
    pub fn total(&self) -> f64 {
        self.pair_term + self.self_term
    }
}

/// Rearranged form of the diagonal pairing, which exposes its positivity.
pub fn bilaplacian_rearranged(w: &RadialWeight, grid: &Grid, rho: &[f64]) -> Result<Rearranged> {
    let r0 = check_pairing_inputs(w, grid, rho, rho)?;
    let all = pairs::sites(grid, |_| true);
    let support = pairs::sites(grid, |i| rho[i] != 0.0);
    check_budget(support.len() as u128 * all.len() as u128, DEFAULT_PAIR_CAP)?;
    let hv = grid.cell_volume();
    let table = tail_kernel(grid, r0);
    // pairs with both ends off the support contribute nothing
    let mut pair_term = double_sum(&support, &all, |a, b| {
        let d = rho[a.idx] - rho[b.idx];
        table.get(a, b) * d * d
    });
    let inner_both = double_sum(&support, &support, |a, b| {
        let d = rho[a.idx] - rho[b.idx];
        table.get(a, b) * d * d
    });
    // Σ over support×all counts support–support pairs once per order and
    // support–outside pairs once; the symmetric sum needs the former once
    // per order and the latter twice.
    pair_term = 0.5 * (2.0 * pair_term - inner_both) * hv * hv;
    let mut self_term = 0.0;
    let mut exterior_term = 0.0;
    for s in &support {
        let lattice: f64 = all.iter().map(|b| table.get(s, b)).sum::<f64>() * hv;
        let r2 = rho[s.idx] * rho[s.idx];
        self_term += r2 * (2.0 * PI / r0 - lattice);
        exterior_term += r2 * pairs::exterior_inverse_cube(grid, s.idx)?;
    }
    Ok(Rearranged {
        pair_term,
        self_term: self_term * hv,
        exterior_term: exterior_term * hv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn closed_a_r(r: f64, r0: f64) -> f64 {
        if r <= r0 {
            (r / r0) * (0.75 + 0.5 * (r0 / r).ln())
        } else {
            1.0 - r0 / (4.0 * r)
        }
    }

    fn closed_a(r: f64, r0: f64) -> f64 {
        if r <= r0 {
            r * r / (2.0 * r0) * (1.0 + 0.5 * (r0 / r).ln())
        } else {
            0.5 * r0 + (r - r0) - 0.25 * r0 * (r / r0).ln()
        }
    }

    #[test]
    fn abs_weight() {
        let w = weight_abs();
        assert_eq!(w.a(2.5), 2.5);
        assert_eq!(w.a_r(7.0), 1.0);
        assert_eq!(w.laplacian(2.0, 2), 0.5);
        assert_eq!(w.laplacian(2.0, 1), 0.0);
        assert!(convexity_certificate(&w, &log_spaced(1e-3, 10.0, 20)).passed);
    }

    #[test]
    fn rejects_bad_r0() {
        assert!(weight_r0(0.0).is_err());
        assert!(weight_r0(-1.0).is_err());
        assert!(weight_r0(f64::NAN).is_err());
    }

    #[test]
    fn r0_weight_closed_forms() {
        for r0 in [0.1, 1.0, 3.0] {
            let w = weight_r0(r0).unwrap();
            assert!((w.lap_a(r0 / E) - 2.0 / r0).abs() < 1e-12 / r0);
            assert!((w.a_r(r0) - 0.75).abs() < 1e-12);
            for r in log_spaced(1e-4 * r0, 1e3 * r0, 40) {
                assert!((w.a_r(r) - closed_a_r(r, r0)).abs() < 1e-10, "r={r}");
            }
        }
        let w = weight_r0(1.0).unwrap();
        assert!((w.a_r(100.0) - 0.9975).abs() < 1e-12);
        for r in [0.01, 0.3, 1.0, 2.5, 10.0] {
            assert!((w.a(r) - closed_a(r, 1.0)).abs() < 1e-9 * (1.0 + r), "r={r}");
        }
        assert_eq!(w.a(0.0), 0.0);
        assert_eq!(w.a_r(0.0), 0.0);
    }

    #[test]
    fn identity_closed_form() {
        let w = weight_r0(1.0).unwrap();
        assert!((w.lap_identity(1.0 / E) - 1.0).abs() < 1e-15);
        assert_eq!(w.lap_identity(2.0), 0.0);
        for r in [0.05, 0.5, 1.5] {
            let direct = w.lap_a(r) + r * w.lap_a_prime(r);
            assert!((direct - w.lap_identity(r)).abs() < 1e-12);
        }
    }

    #[test]
    fn convexity_passes() {
        let w = weight_r0(0.5).unwrap();
        let rep = convexity_certificate(&w, &log_spaced(1e-5, 1e3, 200));
        assert!(rep.passed);
        assert!(rep.min_a_rr >= -1e-12);
        assert!(rep.max_a_r <= 1.0 + 1e-12);
    }

    #[test]
    fn table_export() {
        let w = weight_r0(1.0).unwrap();
        let mut buf = Vec::new();
        w.write_table(&[0.5, 1.0, 2.0], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 4);
        assert!(text.starts_with("r,a,a_r,lap_a,a_rr"));
    }
}
