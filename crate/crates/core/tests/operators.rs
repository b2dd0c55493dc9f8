use std::f64::consts::PI;

use betapot::fields::{ScalarField, WeightFunction};
use betapot::metric::{BetaParams, Point};
use betapot::operators::{build_growth_function, frac_integral, gen_frac_integral, holder_exponents};
use betapot::convention::ExponentConvention;
use betapot::quadrature::QuadratureConfig;
use proptest::prelude::*;

fn cfg() -> QuadratureConfig {
    QuadratureConfig::default()
}

#[test]
fn frac_integral_is_linear() {
    let bp = BetaParams::new(vec![1.0, 1.5]).unwrap();
    let x = [0.1, -0.05];
    let o = Point::origin(2);
    let f = ScalarField::gaussian(Point(vec![0.0, 0.1]), 0.3, 1.0, &bp).unwrap().truncated(o.clone(), 1.0).unwrap();
    let f3 = ScalarField::gaussian(Point(vec![0.0, 0.1]), 0.3, 3.0, &bp).unwrap().truncated(o, 1.0).unwrap();
    let a = frac_integral(&f, 1.5, &x, &bp, &cfg()).unwrap();
    let b = frac_integral(&f3, 1.5, &x, &bp, &cfg()).unwrap();
    assert!((b.value - 3.0 * a.value).abs() <= 1e-10 * b.value, "{} vs 3 × {}", b.value, a.value);
}

#[test]
fn frac_integral_is_monotone() {
    let bp = BetaParams::isotropic(2);
    let o = Point::origin(2);
    let small = ScalarField::bump(o.clone(), 0.5, &bp).unwrap();
    let big = ScalarField::constant(1.0, &bp).truncated(o, 0.6).unwrap();
    for x in [[0.0, 0.0], [0.3, 0.1], [0.7, -0.2]] {
        let a = frac_integral(&small, 1.5, &x, &bp, &cfg()).unwrap();
        let b = frac_integral(&big, 1.5, &x, &bp, &cfg()).unwrap();
        assert!(a.value <= b.value + a.error_estimate + b.error_estimate, "{x:?}: {} > {}", a.value, b.value);
    }
}

#[test]
fn constant_weight_divides() {
    let bp = BetaParams::new(vec![0.75, 1.25]).unwrap();
    let f = ScalarField::bump(Point::origin(2), 0.4, &bp).unwrap();
    let x = [0.05, 0.02];
    let plain = frac_integral(&f, 1.8, &x, &bp, &cfg()).unwrap();
    let weighted = gen_frac_integral(&f, 1.8, &WeightFunction::constant(2.5), &x, &bp, &cfg()).unwrap();
    assert!((weighted.value - plain.value / 2.5).abs() <= 1e-10 * plain.value);
}

#[test]
fn frac_integral_of_disc_at_its_center() {
    // ∫_{|y|<1} |y|^{-(n-p)} dy = 2π/p for n = 2
    let bp = BetaParams::isotropic(2);
    let f = ScalarField::constant(1.0, &bp).truncated(Point::origin(2), 1.0).unwrap();
    for p in [1.2, 1.5, 1.8] {
        let v = frac_integral(&f, p, &[0.0, 0.0], &bp, &cfg()).unwrap();
        let exact = 2.0 * PI / p;
        assert!((v.value - exact).abs() <= 1e-6 * exact, "p={p}: {} vs {exact}", v.value);
    }
}

#[test]
fn holder_exponents_split_the_first_order_kernel() {
    for beta in [vec![0.5, 0.5], vec![1.0, 1.0], vec![1.0, 1.5, 0.75]] {
        let bp = BetaParams::new(beta).unwrap();
        for p in [1.5, 2.0, 2.5] {
            if p >= bp.n() as f64 {
                continue;
            }
            let (s, e1, q2) = holder_exponents(p, &bp, ExponentConvention::Generalized);
            let pc = p / (p - 1.0);
            assert!((e1 - (s / p + q2 / pc)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn growth_round_trip(sigma in 0.1f64..0.9, alpha in 0.25f64..3.0, k in 0usize..20) {
        let bp = BetaParams::isotropic(2);
        let gf = build_growth_function(&WeightFunction::power(alpha), sigma, 1.5, &bp).unwrap();
        prop_assert!(gf.round_trip_error <= 1e-8);
        let (lo, hi) = gf.t_range();
        let t = (lo.max(1e-8).ln() + (hi.min(1e8) / lo.max(1e-8)).ln() * k as f64 / 19.0).exp();
        let u = gf.psi(t).unwrap();
        let back = gf.g(u).unwrap();
        prop_assert!((back - t).abs() <= 1e-8 * t, "{} vs {}", back, t);
        let exact = gf.power_law_psi(t).unwrap();
        prop_assert!((u - exact).abs() <= 1e-8 * exact);
    }

    #[test]
    fn growth_is_superlinear(sigma in 0.1f64..0.9, b in 0.5f64..3.0) {
        let bp = BetaParams::isotropic(3);
        let gf = build_growth_function(&WeightFunction::log_power(b), sigma, 2.0, &bp).unwrap();
        let ts: Vec<f64> = (0..11).map(|i| 1e6 * 10f64.powf(0.2 * i as f64)).collect();
        let ratios: Vec<f64> = ts.iter().map(|t| gf.g(*t).unwrap() / t).collect();
        prop_assert!(ratios.windows(2).all(|w| w[1] > w[0]), "{:?}", ratios);
    }
}

#[test]
fn growth_rejects_bad_sigma() {
    let bp = BetaParams::isotropic(2);
    assert!(build_growth_function(&WeightFunction::power(1.0), 1.0, 1.5, &bp).is_err());
    assert!(build_growth_function(&WeightFunction::power(1.0), 0.5, 2.5, &bp).is_err());
}
