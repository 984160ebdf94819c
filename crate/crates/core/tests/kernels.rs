use std::f64::consts::PI;

use chiral_chain::kernels::{
    g_2d, g_2d_kramers_kronig, kernel_1d_reciprocal, kernel_2d, kernel_3d, DipoleGeometry,
};
use proptest::prelude::*;

fn geom(xi: f64, a: f64) -> DipoleGeometry {
    DipoleGeometry::new(xi, a).unwrap()
}

#[test]
fn kramers_kronig_reproduces_2d_shift() {
    for &alignment in &[0.0, 0.6, 1.0] {
        for &xi in &[0.5, 1.0, 2.0, 3.3, 5.0] {
            let rebuilt = g_2d_kramers_kronig(xi, alignment, 1e-7).unwrap();
            let direct = g_2d(xi, alignment).unwrap();
            assert!(
                (rebuilt - direct).abs() < 1e-4,
                "xi={xi} alignment={alignment}: {rebuilt} vs {direct}"
            );
        }
    }
    assert!(g_2d_kramers_kronig(0.0, 0.0, 1e-7).is_err());
}

#[test]
fn three_d_far_field_falls_off_as_inverse_distance() {
    for &xi in &[200.0, 2000.0] {
        let k = kernel_3d(geom(xi, 0.3));
        assert!(k.collective_decay().abs() * xi <= 1.5 + 1e-9);
        assert!(k.frequency_shift().abs() * xi <= 0.75 + 1e-9);
    }
}

#[test]
fn two_d_origin_limit_is_alignment_independent() {
    for &a in &[-1.0, 0.0, 0.4, 1.0] {
        let k = kernel_2d(geom(1e-6, a));
        assert!((k.collective_decay() - 1.0).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn three_d_decay_limit_is_alignment_independent(a in -1.0f64..1.0) {
        let k = kernel_3d(geom(1e-5, a));
        prop_assert!((k.collective_decay() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn one_d_kernel_is_a_unit_half_circle(xi in 0.0f64..100.0) {
        let j = kernel_1d_reciprocal(xi).unwrap().coupling();
        prop_assert!((j.norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_d_matches_formula_away_from_origin(xi in 0.2f64..50.0, a in -1.0f64..1.0) {
        let a2 = a * a;
        let (s, c) = xi.sin_cos();
        let gamma = 1.5 * ((1.0 - a2) * s / xi + (1.0 - 3.0 * a2) * (c / (xi * xi) - s / xi.powi(3)));
        let k = kernel_3d(geom(xi, a));
        prop_assert!((k.collective_decay() - gamma).abs() < 1e-12);
        prop_assert!(!k.shift_divergent);
    }
}

#[test]
fn one_d_special_points() {
    for n in 0..20 {
        let k = kernel_1d_reciprocal(n as f64 * PI).unwrap();
        assert!(k.shift_part.abs() < 1e-12 && (k.decay_part.abs() - 0.5).abs() < 1e-12);
        let k = kernel_1d_reciprocal(0.5 * PI + n as f64 * PI).unwrap();
        assert!(k.decay_part.abs() < 1e-12 && (k.shift_part.abs() - 0.5).abs() < 1e-12);
    }
}
