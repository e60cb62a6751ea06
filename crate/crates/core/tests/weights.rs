mod common;

use std::f64::consts::{E, PI};

use nlslab::analysis::besov_double_integral;
use nlslab::quadrature::integrate;
use nlslab::weights::{
    bilaplacian_pairing, bilaplacian_rearranged, convexity_certificate, log_spaced, weight_abs, weight_r0,
};
use nlslab::{make_grid, Complex64, Field};
use proptest::prelude::*;

use common::rel;

#[test]
fn abs_weight_examples() {
    let w = weight_abs();
    assert_eq!(w.a(2.5), 2.5);
    for r in [1e-3, 0.7, 3.0, 1e4] {
        assert_eq!(w.a_r(r), 1.0);
        assert_eq!(w.a_rr(r), 0.0);
    }
    let cert = convexity_certificate(&w, &log_spaced(1e-3, 10.0, 50));
    assert!(cert.passed);
}

#[test]
fn r0_weight_closed_forms() {
    for r0 in [0.1, 1.0, 3.0] {
        let w = weight_r0(r0).unwrap();
        assert!(rel(w.lap_a(r0 / E), 2.0 / r0) < 1e-14);
        assert!((w.a_r(r0) - 0.75).abs() < 1e-10);
        assert!((w.a_r(100.0 * r0) - 0.9975).abs() < 1e-10);
        // both branches of Δa meet at r0
        let left = (1.0 + (r0 / r0).ln()) / r0;
        assert_eq!(left, w.lap_a(r0));
        assert!(rel(w.lap_a(r0 * (1.0 - 1e-12)), w.lap_a(r0)) < 1e-10);
    }
    let w = weight_r0(1.0).unwrap();
    assert!((w.lap_identity(1.0 / E) - 1.0).abs() < 1e-15);
    assert_eq!(w.lap_identity(2.0), 0.0);
    assert!(weight_r0(0.0).is_err() && weight_r0(-1.0).is_err());
}

#[test]
fn a_r_monotone_bounded_and_matches_far_field() {
    let r0 = 0.5;
    let w = weight_r0(r0).unwrap();
    let radii = log_spaced(1e-4, 1e3, 400);
    let mut prev = 0.0;
    for &r in &radii {
        let ar = w.a_r(r);
        assert!((0.0..=1.0 + 1e-12).contains(&ar), "r = {r}: {ar}");
        assert!(ar >= prev - 1e-12);
        prev = ar;
        if r >= r0 {
            assert!((ar - (1.0 - r0 / (4.0 * r))).abs() <= 1e-10, "r = {r}");
        }
    }
    assert_eq!(w.a(0.0), 0.0);
    assert_eq!(w.a_r(0.0), 0.0);
    let cert = convexity_certificate(&w, &radii);
    assert!(cert.passed && cert.min_a_rr >= -1e-12, "{}", cert.min_a_rr);
}

#[test]
fn kernel_mass_identity() {
    for r0 in [0.1, 1.0] {
        let q = integrate(|s| 2.0 * PI / (s * s), r0, 1e4 * r0, 1e-12).unwrap().value;
        // the tail beyond R carries 2π/R
        assert!(rel(q, 2.0 * PI / r0) <= 1e-4 + 1e-8);
        assert!(rel(q + 2.0 * PI / (1e4 * r0), 2.0 * PI / r0) <= 1e-8);
    }
}

fn bumps(grid: &nlslab::Grid, sep: f64) -> Field {
    Field::from_fn(grid, |[x, y]| {
        let a = (-((x + sep / 2.0).powi(2) + y * y) / 1.5).exp();
        let b = (-((x - sep / 2.0).powi(2) + y * y) / 1.5).exp();
        Complex64::new(a + b, 0.0)
    })
    .unwrap()
}

#[test]
fn pairing_matches_rearranged_form() {
    let g = make_grid(2, 16.0, 64).unwrap();
    let w = weight_r0(1.0).unwrap();
    let disc: Vec<f64> = (0..g.len())
        .map(|i| {
            let [x, y] = g.point(i);
            if x.hypot(y) < 2.0 {
                1.0
            } else {
                0.0
            }
        })
        .collect();
    let rho: Vec<f64> = bumps(&g, 5.0).values().iter().map(|v| 0.5 * v.norm_sqr()).collect();
    for r in [&disc, &rho] {
        let direct = bilaplacian_pairing(&w, &g, r, r).unwrap();
        let re = bilaplacian_rearranged(&w, &g, r).unwrap();
        assert!(re.pair_term >= 0.0);
        assert!(direct >= -1e-10 * re.pair_term.abs().max(1.0));
        assert!(rel(re.total(), direct) <= 1e-10, "{} {direct}", re.total());
    }
    // constant density over the whole box: every difference vanishes
    let flat = vec![1.0; g.len()];
    assert_eq!(bilaplacian_rearranged(&w, &g, &flat).unwrap().pair_term, 0.0);
    assert!(bilaplacian_pairing(&weight_abs(), &g, &flat, &flat).is_err());
}

#[test]
fn small_r0_limit_is_the_besov_integral() {
    let g = make_grid(2, 16.0, 128).unwrap();
    let f = bumps(&g, 5.0);
    let rho: Vec<f64> = f.values().iter().map(|v| 0.5 * v.norm_sqr()).collect();
    // ρ = |u|²/2, so the r0 → 0 limit of ½∫∫(ρ1-ρ2)²w is one eighth of the |u|² integral
    let target = besov_double_integral(&f).unwrap().value / 8.0;
    let mut prev = f64::INFINITY;
    for k in -1..4 {
        let r0 = 0.5f64.powi(k);
        let re = bilaplacian_rearranged(&weight_r0(r0).unwrap(), &g, &rho).unwrap();
        let gap = (re.pair_term + re.exterior_term - target).abs() / target;
        assert!(gap < prev, "r0 = {r0}: {gap} vs {prev}");
        prev = gap;
    }
    assert!(prev < 0.06, "{prev}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn a_r_in_unit_interval_and_convex(r0 in 1e-3f64..10.0, t in -6.0f64..6.0) {
        let w = weight_r0(r0).unwrap();
        let r = r0 * 10f64.powf(t / 2.0);
        let ar = w.a_r(r);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ar));
        prop_assert!(w.a_rr(r) >= -1e-12);
        prop_assert!(w.q(r) >= -1e-12 * (r * r * w.lap_a(r)).abs());
    }
}
