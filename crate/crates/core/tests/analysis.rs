mod common;

use std::f64::consts::PI;

use nlslab::analysis::{
    besov_double_integral, commutator_kernel, densities, erf_action_terms, half_derivative_sq, interaction_action,
    interaction_commutator_form, interaction_lhs, morawetz_action, p1_limit, p2_commutator_form, p4_limit,
    sym2_eigenvalues, two_point_momentum,
};
use nlslab::solver::{evolve, evolve_with, mass, EvolveOptions, Flow, SolverConfig, Trajectory};
use nlslab::weights::{weight_abs, weight_r0};
use nlslab::{make_grid, Complex64, Error, Field};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{band_limited, gaussian, rel};

/// Bumps of width `w` at `∓sep/2` along the first axis moving towards each other.
fn two_bump(grid: &nlslab::Grid, w: f64, sep: f64, v: f64) -> Field {
    Field::from_fn(grid, |[x, y]| {
        let y2 = if grid.dim() == 2 { y * y } else { 0.0 };
        let l = Complex64::from_polar((-((x + sep / 2.0).powi(2) + y2) / (w * w)).exp(), v * x);
        let r = Complex64::from_polar((-((x - sep / 2.0).powi(2) + y2) / (w * w)).exp(), -v * x);
        l + r
    })
    .unwrap()
}

#[test]
fn density_examples() {
    let g = make_grid(1, 32.0, 256).unwrap();
    let d = densities(&gaussian(&g, 1.0, 1.5, 0.0, 0.0));
    assert!(d.p(0).iter().all(|v| v.abs() < 1e-14));
    let v = 0.75;
    let f = gaussian(&g, 1.0, 1.5, 0.0, v);
    let d = densities(&f);
    for (i, p) in d.p(0).iter().enumerate() {
        assert!((p - v * f.values()[i].norm_sqr()).abs() < 1e-10);
    }
}

#[test]
fn stress_formulas_agree() {
    let g = make_grid(2, 16.0, 64).unwrap();
    for f in [gaussian(&g, 1.0, 1.5, 1.0, 0.8), band_limited(&g, 6.0, 3)] {
        let d = densities(&f);
        for i in 0..g.len() {
            assert!((d.sigma(0, 1)[i] - d.sigma(1, 0)[i]).abs() <= 1e-12);
        }
        assert!(d.stress_mismatch() <= 1e-8, "{}", d.stress_mismatch());
    }
}

#[test]
fn local_mass_law_residual() {
    let g = make_grid(1, 32.0, 256).unwrap();
    let f = gaussian(&g, 1.0, 1.5, 0.0, 0.5);
    let residual = |dt_out: f64| {
        let cfg = SolverConfig::new(3.0, dt_out / 10.0, 2.0 * dt_out, dt_out).unwrap();
        let traj = evolve(&f, &cfg).unwrap();
        let s = traj.snapshots();
        let (r0, r2) = (densities(&s[0].1), densities(&s[2].1));
        let div = densities(&s[1].1).div_p();
        let scale = div.iter().map(|v| v.abs()).fold(0.0, f64::max);
        (0..g.len())
            .map(|i| ((r2.rho()[i] - r0.rho()[i]) / (2.0 * dt_out) + div[i]).abs())
            .fold(0.0, f64::max)
            / scale
    };
    let (a, b) = (residual(0.02), residual(0.01));
    assert!(b < 1e-3, "{b}");
    assert!(a / b > 3.0, "{a} {b}");
}

#[test]
fn morawetz_examples() {
    let g = make_grid(1, 64.0, 1024).unwrap();
    let weights = [weight_abs(), weight_r0(0.5).unwrap(), weight_r0(2.0).unwrap()];
    let real = gaussian(&g, 1.0, 1.0, 2.0, 0.0);
    let centred = gaussian(&g, 1.0, 1.0, 0.0, 1.3);
    for w in &weights {
        assert!(morawetz_action(&real, w).abs() <= 1e-12);
        assert!(morawetz_action(&centred, w).abs() <= 1e-10);
    }
    let v = 1.3;
    let offset = gaussian(&g, 1.0, 1.0, 5.0, v);
    let m = morawetz_action(&offset, &weight_r0(0.1).unwrap());
    assert!(rel(m, 2.0 * v * mass(&offset)) <= 0.02, "{m}");
}

#[test]
fn interaction_action_examples() {
    let g = make_grid(1, 32.0, 256).unwrap();
    let w = weight_abs();
    assert!(interaction_action(&gaussian(&g, 1.0, 1.0, 1.0, 0.0), &w).unwrap().abs() <= 1e-12);
    let a = gaussian(&g, 1.0, 1.0, 1.0, 0.9);
    let b = two_bump(&g, 1.0, 4.0, 0.4);
    let f = Field::new(&g, a.values().iter().zip(b.values()).map(|(x, y)| x + y).collect()).unwrap();
    let d = densities(&f);
    let h = g.spacing();
    let p1: f64 = d.p(0).iter().map(|v| v.abs()).sum::<f64>() * h;
    let r1: f64 = d.rho().iter().sum::<f64>() * h;
    let m = interaction_action(&f, &w).unwrap();
    assert!(m.abs() <= 2.0 * 1.0 * p1 * r1 * 2.0);
}

#[test]
fn two_bump_sign_flip() {
    let g = make_grid(1, 64.0, 512).unwrap();
    let w = weight_abs();
    let f = two_bump(&g, 2.0, 16.0, 2.0);
    assert!(interaction_action(&f, &w).unwrap() < 0.0);
    // group velocity 2v = 4: the bumps meet at t = 2 and are 8 apart again at t = 3
    let cfg = SolverConfig::new(3.0, 1e-2, 3.0, 3.0).unwrap();
    let traj = evolve_with(&f, &cfg, &EvolveOptions::with_flow(Flow::Linear)).unwrap();
    assert!(interaction_action(traj.last(), &w).unwrap() > 0.0);
}

#[test]
fn tensor_and_commutator_forms_agree() {
    let g = make_grid(2, 16.0, 32).unwrap();
    for f in [two_bump(&g, 1.5, 5.0, 0.7), band_limited(&g, 4.0, 11)] {
        let a = interaction_action(&f, &weight_abs()).unwrap();
        let b = interaction_commutator_form(&f).unwrap();
        assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()), "{a} {b}");
    }
}

#[test]
fn commutator_kernel_examples() {
    let eta = commutator_kernel(&[1.0, 0.0], &[0.0, 0.0]).unwrap();
    assert_eq!(eta, vec![0.0, 0.0, 0.0, 1.0]);
    assert!(commutator_kernel(&[0.5, 0.5], &[0.5, 0.5]).is_err());
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10_000 {
        let x = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let y = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        let eta = commutator_kernel(&x, &y).unwrap();
        let r = [x[0] - y[0], x[1] - y[1]];
        let er = [eta[0] * r[0] + eta[1] * r[1], eta[2] * r[0] + eta[3] * r[1]];
        assert!(er[0].abs() + er[1].abs() <= 1e-12 * (r[0].abs() + r[1].abs()).max(1.0));
        let [lo, hi] = sym2_eigenvalues(&eta);
        assert!(lo.min(hi) >= -1e-12);
        assert!(rel(lo.max(hi), 1.0 / r[0].hypot(r[1])) <= 1e-10);
    }
}

#[test]
fn two_point_momentum_examples() {
    let g = make_grid(2, 16.0, 32).unwrap();
    let f = gaussian(&g, 1.0, 2.0, 0.0, 0.8);
    let d = densities(&f);
    let c = g.len() / 2 + 16;
    assert!(two_point_momentum(&d, c, c).unwrap().iter().all(|v| v.abs() < 1e-15));
    let real = densities(&gaussian(&g, 1.0, 2.0, 0.0, 0.0));
    assert!(two_point_momentum(&real, c, c + 3).unwrap().iter().all(|v| v.abs() < 1e-15));
    assert!(matches!(
        two_point_momentum(&densities(&Field::zeros(&g)), 0, 1),
        Err(Error::DegenerateDensity { .. })
    ));
    let (value, scale) = p2_commutator_form(&densities(&band_limited(&g, 4.0, 5)), 2).unwrap();
    assert!(value >= -1e-10 * scale);
}

#[test]
fn erf_terms_converge_to_limits() {
    let g = make_grid(1, 16.0, 2048).unwrap();
    let f = gaussian(&g, 1.0, 1.0, 0.0, 0.0);
    let (l1, l4) = (p1_limit(&f), p4_limit(&f, 3.0));
    assert!((l1 - PI.sqrt() / 4.0).abs() < 1e-10);
    assert!((l4 - 0.25 * (PI / 6.0).sqrt()).abs() < 1e-10);
    let mut prev = (f64::INFINITY, f64::INFINITY);
    for k in 1..7 {
        let eps = 0.5f64.powi(k);
        let t = erf_action_terms(&f, 3.0, eps).unwrap();
        assert_eq!(t.p2, 0.0);
        let e = ((t.p1 - l1).abs(), (t.p4 - l4).abs());
        assert!(e.0 < prev.0 && e.1 < prev.1, "eps = {eps}: {e:?}");
        prev = e;
    }
    assert!(prev.0 < 2e-3 * l1 && prev.1 < 2e-3 * l4, "{prev:?}");
}

#[test]
fn erf_terms_reject_unresolved_scale() {
    let g = make_grid(1, 16.0, 256).unwrap();
    let f = gaussian(&g, 1.0, 1.0, 0.0, 0.0);
    assert!(erf_action_terms(&f, 3.0, g.spacing()).is_err());
    assert!(erf_action_terms(&f, 3.0, 2.0 * g.spacing()).is_ok());
}

#[test]
fn besov_examples() {
    let g = make_grid(2, 16.0, 64).unwrap();
    let flat = Field::from_fn(&g, |[x, y]| Complex64::from_polar(1.0, 0.3 * x - y)).unwrap();
    // the exterior correction assumes decaying data, so only the lattice
    // sum and the diagonal term are meaningful for a box-filling field
    let e = besov_double_integral(&flat).unwrap();
    assert!(e.raw.abs() < 1e-12 && e.diagonal_correction.abs() < 1e-12, "{e:?}");
    let f = gaussian(&g, 1.0, 1.5, 0.0, 0.0);
    let one = besov_double_integral(&f).unwrap().value;
    let two = besov_double_integral(&f.scale(Complex64::new(2.0, 0.0))).unwrap().value;
    assert!(rel(two, 16.0 * one) < 1e-12);
    let ratios: Vec<f64> = [1.0, 2.0]
        .iter()
        .map(|&w| {
            let f = gaussian(&g, 1.0, w, 0.0, 0.0);
            besov_double_integral(&f).unwrap().value / half_derivative_sq(&f)
        })
        .collect();
    assert!(rel(ratios[0], ratios[1]) <= 0.02, "{ratios:?}");
}

#[test]
fn interaction_lhs_examples() {
    let g = make_grid(2, 16.0, 32).unwrap();
    let cfg = SolverConfig::new(5.0, 1e-2, 0.5, 0.1).unwrap();
    let zero = evolve(&Field::zeros(&g), &cfg).unwrap();
    assert_eq!(interaction_lhs(&zero).unwrap(), 0.0);
    let f = gaussian(&g, 1.0, 1.5, 0.0, 0.0);
    let single = Trajectory::from_snapshots(cfg, Flow::Nonlinear, vec![(0.0, f.clone())]);
    if let Ok(t) = single {
        assert!(matches!(interaction_lhs(&t), Err(Error::InsufficientSnapshots(1))));
    }
    let frozen = evolve_with(&f, &cfg, &EvolveOptions::with_flow(Flow::Frozen)).unwrap();
    let value = nlslab::analysis::correlation_density(&f);
    assert!(rel(interaction_lhs(&frozen).unwrap(), 0.5 * value) <= 1e-10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn erf_terms_nonnegative(seed in any::<u64>(), p in 1.5f64..7.0, k in 0usize..4) {
        let g = make_grid(1, 16.0, 256).unwrap();
        let f = Field::new(
            &g,
            band_limited(&g, 12.0, seed)
                .values()
                .iter()
                .zip(gaussian(&g, 1.0, 3.0, 0.0, 0.0).values())
                .map(|(a, b)| a * b)
                .collect(),
        )
        .unwrap();
        let eps = 2.0 * g.spacing() * 2f64.powi(k as i32);
        let t = erf_action_terms(&f, p, eps).unwrap();
        let s = t.scale();
        for v in [t.p1, t.p2, t.p3, t.p4] {
            prop_assert!(v >= -1e-10 * s);
        }
    }

    #[test]
    fn rho_nonnegative_and_sigma_symmetric(seed in any::<u64>()) {
        let g = make_grid(2, 8.0, 16).unwrap();
        let d = densities(&band_limited(&g, 5.0, seed));
        prop_assert!(d.rho().iter().all(|&r| r >= 0.0));
        for i in 0..g.len() {
            prop_assert!((d.sigma(0, 1)[i] - d.sigma(1, 0)[i]).abs() <= 1e-12);
        }
    }
}
