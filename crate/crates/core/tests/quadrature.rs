use std::f64::consts::PI;

use betapot::fields::{make_example1_field, ScalarField};
use betapot::metric::{angular_measure, ball_volume, BetaParams, Point};
use betapot::quadrature::{
    best_effort, integrate_annulus, integrate_annulus_kernel, integrate_ball, integrate_singular, monte_carlo,
    MethodChoice, QuadratureConfig, RadialKernel,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn chart() -> QuadratureConfig {
    QuadratureConfig { method: MethodChoice::TensorChart, ..QuadratureConfig::default() }
}

fn random_betas(n: usize, count: usize, seed: u64) -> Vec<BetaParams> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| BetaParams::new((0..n).map(|_| rng.gen_range(0.5..2.0)).collect()).unwrap()).collect()
}

#[test]
fn chart_agrees_with_monte_carlo_for_every_registry_field() {
    let cfg = chart();
    for n in [2usize, 3] {
        for bp in random_betas(n, 5, 17 + n as u64) {
            let o = Point::origin(n);
            let fields = [
                ("constant", ScalarField::constant(1.0, &bp), 0.8),
                ("gaussian", ScalarField::gaussian(o.clone(), 0.3, 1.0, &bp).unwrap(), 0.8),
                ("power", ScalarField::power(o.clone(), 0.25, &bp).unwrap(), 0.8),
                ("example1", make_example1_field(&bp).unwrap(), 0.06),
                ("bump", ScalarField::bump(o.clone(), 0.5, &bp).unwrap(), 0.8),
            ];
            for (name, f, r) in fields.iter() {
                let c = best_effort(integrate_ball(f, &o.0, *r, &bp, &cfg)).unwrap();
                let m = monte_carlo(f, RadialKernel::none(), &o.0, 0.0, *r, &bp, 400_000, 99).unwrap();
                let se = (c.error_estimate.powi(2) + m.error_estimate.powi(2)).sqrt();
                assert!(
                    (c.value - m.value).abs() <= 3.0 * se,
                    "{name} β={:?}: chart {} ± {} vs MC {} ± {}",
                    bp.beta(),
                    c.value,
                    c.error_estimate,
                    m.value,
                    m.error_estimate
                );
            }
        }
    }
}

#[test]
fn ball_volume_matches_closed_form() {
    let cfg = chart();
    for beta in [vec![0.5, 0.5], vec![1.0, 1.5], vec![0.75, 1.25, 2.0]] {
        let bp = BetaParams::new(beta).unwrap();
        let one = ScalarField::constant(1.0, &bp);
        for r in [0.3, 2.5] {
            let got = integrate_ball(&one, &vec![0.0; bp.n()], r, &bp, &cfg).unwrap();
            let exact = ball_volume(&bp, r);
            assert!((got.value - exact).abs() <= cfg.rel_tol * exact, "{:?} r={r}: {} vs {exact}", bp.beta(), got.value);
        }
    }
    let tight = QuadratureConfig { rel_tol: 1e-10, ..chart() };
    let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
    let got = integrate_ball(&ScalarField::constant(1.0, &bp), &[0.0, 0.0], 1.0, &bp, &tight).unwrap();
    let exact = ball_volume(&bp, 1.0);
    assert!((got.value - exact).abs() <= 1e-8 * exact, "{} vs {exact}", got.value);
}

#[test]
fn singular_kernel_matches_polar_formula() {
    // ∫_{B(0,r)} |y|^{-s} dy = (Ω/a) r^{n-s}/(n-s) in the variable t = |y|_β
    let cfg = chart();
    for beta in [vec![0.5, 0.5, 0.5], vec![1.0, 0.75, 1.5]] {
        let bp = BetaParams::new(beta).unwrap();
        let n = bp.n() as f64;
        let one = ScalarField::constant(1.0, &bp);
        for s in [0.5, 1.7, 2.9] {
            let got = integrate_singular(&one, s, &[0.0, 0.0, 0.0], 0.7, &bp, &cfg).unwrap();
            let exact = angular_measure(&bp) / bp.a() * 0.7f64.powf(n - s) / (n - s);
            assert!((got.value - exact).abs() <= cfg.rel_tol * exact, "s={s}: {} vs {exact}", got.value);
        }
        assert!(integrate_singular(&one, 3.0, &[0.0, 0.0, 0.0], 0.7, &bp, &cfg).is_err());
    }
    assert!((angular_measure(&BetaParams::isotropic(3)) - 4.0 * PI).abs() < 1e-12);
}

#[test]
fn integrals_are_deterministic() {
    let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
    let f = ScalarField::gaussian(Point(vec![0.1, -0.2]), 0.3, 1.0, &bp).unwrap();
    let cfg = QuadratureConfig::default();
    let a = integrate_ball(&f, &[0.0, 0.0], 0.9, &bp, &cfg).unwrap();
    let b = integrate_ball(&f, &[0.0, 0.0], 0.9, &bp, &cfg).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    let m1 = monte_carlo(&f, RadialKernel::none(), &[0.0, 0.0], 0.0, 0.9, &bp, 10_000, 5).unwrap();
    let m2 = monte_carlo(&f, RadialKernel::none(), &[0.0, 0.0], 0.0, 0.9, &bp, 10_000, 5).unwrap();
    assert_eq!(m1, m2);
}

#[test]
fn ball_integral_is_monotone_in_radius() {
    let cfg = chart();
    let bp = BetaParams::new(vec![1.25, 0.75]).unwrap();
    let f = ScalarField::power(Point::origin(2), 0.25, &bp).unwrap();
    let mut prev = 0.0;
    for k in 0..12 {
        let r = 0.01 * 1.6f64.powi(k);
        let v = integrate_ball(&f, &[0.0, 0.0], r, &bp, &cfg).unwrap();
        assert!(v.value >= prev - v.error_estimate, "r={r}: {} < {prev}", v.value);
        prev = v.value;
    }
}

#[test]
fn annulus_kernel_bound() {
    // on r/2^{k+1} ≤ |y| < r/2^k the kernel is at most (2^{k+1}/r)^s
    let cfg = chart();
    let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
    let f = ScalarField::gaussian(Point(vec![0.05, 0.0]), 0.2, 1.0, &bp).unwrap();
    let (r, s) = (0.8, 1.2);
    for k in 0..8 {
        let (lo, hi) = (r / 2f64.powi(k + 1), r / 2f64.powi(k));
        let weighted = integrate_annulus_kernel(&f, RadialKernel::power(s), &[0.0, 0.0], lo, hi, &bp, &cfg).unwrap();
        let plain = integrate_annulus(&f, &[0.0, 0.0], lo, hi, &bp, &cfg).unwrap();
        let bound = (2f64.powi(k + 1) / r).powf(s) * plain.value;
        let tol = weighted.error_estimate + (2f64.powi(k + 1) / r).powf(s) * plain.error_estimate;
        assert!(weighted.value <= bound + tol, "k={k}: {} > {bound}", weighted.value);
    }
}

#[test]
fn bad_configs_are_rejected() {
    let bp = BetaParams::isotropic(2);
    let one = ScalarField::constant(1.0, &bp);
    for cfg in [
        QuadratureConfig { rel_tol: 0.0, ..QuadratureConfig::default() },
        QuadratureConfig { angular_order: 1, ..QuadratureConfig::default() },
        QuadratureConfig { ladder_depth: 0, ..QuadratureConfig::default() },
    ] {
        assert!(integrate_ball(&one, &[0.0, 0.0], 1.0, &bp, &cfg).is_err());
    }
    assert!(integrate_ball(&one, &[0.0, 0.0], -1.0, &bp, &QuadratureConfig::default()).is_err());
}
