use std::f64::consts::PI;

use betapot::metric::{
    ball_box_half_widths, ball_volume, beta_distance, beta_norm, beta_sphere_map, homogeneity_scale, in_ball,
    quasi_triangle_constant, BetaParams, BetaSphericalCoord,
};
use proptest::prelude::*;

fn beta_and_points(count: usize) -> impl Strategy<Value = (Vec<f64>, Vec<Vec<f64>>)> {
    (1usize..=4).prop_flat_map(move |n| {
        (
            prop::collection::vec(0.5f64..3.0, n),
            prop::collection::vec(prop::collection::vec(-50.0f64..50.0, n), count),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn identity_and_symmetry((beta, pts) in beta_and_points(2)) {
        let bp = BetaParams::new(beta).unwrap();
        let (x, y) = (&pts[0], &pts[1]);
        prop_assert_eq!(beta_distance(x, x, &bp).unwrap(), 0.0);
        prop_assert_eq!(beta_distance(x, y, &bp).unwrap(), beta_distance(y, x, &bp).unwrap());
        if x != y {
            prop_assert!(beta_distance(x, y, &bp).unwrap() > 0.0);
        }
    }

    #[test]
    fn quasi_triangle((beta, pts) in beta_and_points(2)) {
        let bp = BetaParams::new(beta).unwrap();
        let k = quasi_triangle_constant(&bp);
        let sum: Vec<f64> = pts[0].iter().zip(&pts[1]).map(|(a, b)| a + b).collect();
        let lhs = beta_norm(&sum, &bp).unwrap();
        let rhs = k * (beta_norm(&pts[0], &bp).unwrap() + beta_norm(&pts[1], &bp).unwrap());
        prop_assert!(lhs <= rhs, "{} > {}", lhs, rhs);
    }

    #[test]
    fn homogeneity((beta, pts) in beta_and_points(1), t in 1e-3f64..1e3) {
        let bp = BetaParams::new(beta).unwrap();
        let x = &pts[0];
        let scaled = homogeneity_scale(x, t, &bp).unwrap();
        let expect = t.powf(bp.abs_beta() / bp.n() as f64) * beta_norm(x, &bp).unwrap();
        let got = beta_norm(&scaled.0, &bp).unwrap();
        prop_assert!((got - expect).abs() <= 1e-12 * expect.max(f64::MIN_POSITIVE), "{} vs {}", got, expect);
    }

    #[test]
    fn isotropic_is_euclidean(pts in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 2)) {
        let bp = BetaParams::isotropic(3);
        let e: f64 = pts[0].iter().zip(&pts[1]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let d = beta_distance(&pts[0], &pts[1], &bp).unwrap();
        prop_assert!((d - e).abs() <= 1e-12 * e.max(1e-300));
    }

    #[test]
    fn chart_round_trip(
        beta in prop::collection::vec(0.5f64..3.0, 3),
        rho in 1e-3f64..1e2,
        a1 in 0.0f64..=(PI / 2.0),
        a2 in 0.0f64..=(PI / 2.0),
        signs in prop::collection::vec(prop::bool::ANY, 3),
    ) {
        let bp = BetaParams::new(beta).unwrap();
        let signs = signs.iter().map(|s| if *s { 1.0 } else { -1.0 }).collect();
        let c = BetaSphericalCoord::new(rho, vec![a1, a2], signs).unwrap();
        let x = beta_sphere_map(&c, &bp).unwrap();
        let got = beta_norm(&x.0, &bp).unwrap();
        let expect = rho.powf(2.0 * bp.abs_beta() / 3.0);
        prop_assert!((got - expect).abs() <= 1e-10 * expect, "{} vs {}", got, expect);
    }

    #[test]
    fn ball_lies_in_its_box((beta, pts) in beta_and_points(1), r in 0.01f64..10.0) {
        let bp = BetaParams::new(beta).unwrap();
        let half = ball_box_half_widths(&bp, r);
        let origin = vec![0.0; bp.n()];
        let x = &pts[0];
        if in_ball(x, &origin, r, &bp).unwrap() {
            prop_assert!(x.iter().zip(&half).all(|(xi, h)| xi.abs() <= *h));
        }
    }
}

#[test]
fn euclidean_example() {
    let bp = BetaParams::isotropic(2);
    assert_eq!(beta_distance(&[0.0, 0.0], &[3.0, 4.0], &bp).unwrap(), 5.0);
}

#[test]
fn ball_volume_scales_like_r_to_the_n() {
    let bp = BetaParams::new(vec![1.0, 1.5, 0.75]).unwrap();
    let v1 = ball_volume(&bp, 1.0);
    for r in [0.1, 2.0, 7.5] {
        let v = ball_volume(&bp, r);
        assert!((v / v1 - r.powi(3)).abs() <= 1e-12 * r.powi(3));
    }
    assert!((ball_volume(&BetaParams::isotropic(2), 1.0) - PI).abs() < 1e-12);
}

#[test]
fn invalid_beta_is_rejected() {
    assert!(BetaParams::new(vec![0.25, 1.0]).is_err());
    assert!(BetaParams::new(vec![]).is_err());
    let bp = BetaParams::isotropic(2);
    assert!(beta_distance(&[0.0], &[0.0, 1.0], &bp).is_err());
}
