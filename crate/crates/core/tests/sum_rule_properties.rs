use std::collections::BTreeMap;
use std::f64::consts::PI;

use proptest::prelude::*;
use sumrules::sum_rules::reference::*;
use sumrules::sum_rules::{z1, z2};
use sumrules::zero_mode::{e0_coefficients, e0_coefficients_kernel};
use sumrules::BoundaryCondition::*;
use sumrules::{density_integral, validate_positivity, Density};

fn params(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn borg_is_dirichlet_isospectral(alpha in -0.8f64..4.0) {
        let d = Density::borg(alpha).unwrap();
        prop_assert!((z1(&d, Dirichlet).unwrap().value - 1.0 / 6.0).abs() < 1e-10);
        prop_assert!((z2(&d, Dirichlet).unwrap().value - 1.0 / 90.0).abs() < 1e-10);
    }

    #[test]
    fn uniform_scaling(a in 0.3f64..3.0) {
        let d = Density::uniform(a).unwrap();
        let (a2, a4) = (a * a, a.powi(4));
        let rel = |got: f64, want: f64| ((got - want) / want).abs();
        prop_assert!(rel(z1(&d, Neumann).unwrap().value, a2 / 6.0) < 1e-11);
        prop_assert!(rel(z1(&d, Periodic).unwrap().value, a2 / 12.0) < 1e-11);
        prop_assert!(rel(z1(&d, Dirichlet).unwrap().value, a2 / 6.0) < 1e-11);
        prop_assert!(rel(z2(&d, Neumann).unwrap().value, a4 / 90.0) < 1e-11);
        prop_assert!(rel(z2(&d, Periodic).unwrap().value, a4 / 720.0) < 1e-11);
        prop_assert!(rel(z2(&d, Dirichlet).unwrap().value, a4 / 90.0) < 1e-11);
    }

    #[test]
    fn borg_matches_rational_forms(alpha in -0.8f64..4.0) {
        let d = Density::borg(alpha).unwrap();
        prop_assert!((z1(&d, Neumann).unwrap().value - borg_z1_nn(alpha)).abs() < 1e-9);
        prop_assert!((z1(&d, Periodic).unwrap().value - borg_z1_pp(alpha)).abs() < 1e-9);
        prop_assert!((z2(&d, Neumann).unwrap().value - borg_z2_nn(alpha)).abs() < 1e-9);
        prop_assert!((z2(&d, Periodic).unwrap().value - borg_z2_pp(alpha)).abs() < 1e-9);
    }

    #[test]
    fn oscillating_first_order_at_whole_periods(n in 1u32..25) {
        let eps = 1.0 / n as f64;
        let d = Density::oscillating(eps).unwrap();
        prop_assert!((z1(&d, Neumann).unwrap().value - oscillating_z1(eps)).abs() < 1e-9);
    }

    #[test]
    fn oscillating_trace_for_any_period(eps in 0.05f64..1.5) {
        // ∫(1/12 + x²)Σ with u = x + 1/2 and k = 2π/ε, integrated by parts
        let k = 2.0 * PI / eps;
        let c = 1.0 - k.cos();
        let want = 1.0 / 3.0 + c / (3.0 * k) + k.sin() / (k * k) - 2.0 * c / k.powi(3);
        let d = Density::oscillating(eps).unwrap();
        prop_assert!((z1(&d, Neumann).unwrap().trace_term - want).abs() < 1e-11);
    }

    #[test]
    fn second_coefficient_is_never_positive(
        c1 in -0.9f64..0.9,
        c2 in -0.9f64..0.9,
        k in 1.0f64..12.0,
        a in 0.5f64..2.0,
    ) {
        // 1 + (c1 sin(kx) + c2 cos(2kx))/2 stays positive
        let d = Density::expression(
            "1 + (c1*sin(k*x) + c2*cos(2*k*x))/2",
            &params(&[("c1", c1), ("c2", c2), ("k", k)]),
            a,
        ).unwrap();
        for bc in [Neumann, Periodic] {
            let e = e0_coefficients_kernel(&d, bc).unwrap();
            prop_assert!(e.e1 > 0.0);
            prop_assert!(e.e2 <= 1e-15, "{:?} {}", bc, e.e2);
        }
    }

    #[test]
    fn borg_identity_pointwise(alpha in -0.9f64..5.0, t in 0.0f64..=1.0) {
        let d = Density::borg(alpha).unwrap();
        let x = t - 0.5;
        let lhs = d.eval(x) * (1.0 + alpha * (x + 0.5)).powi(4);
        prop_assert!((lhs - (1.0 + alpha).powi(2)).abs() < 1e-13 * (1.0 + alpha).powi(2));
    }
}

#[test]
fn builtin_integrals_match_antiderivatives() {
    for alpha in [-0.7f64, 0.5, 1.0, 3.0] {
        let want = (1.0 + alpha).powi(2) / (3.0 * alpha) * (1.0 - (1.0 + alpha).powi(-3));
        let got = density_integral(&Density::borg(alpha).unwrap()).unwrap().value;
        assert!((got / want - 1.0).abs() < 1e-12, "{alpha}");
    }
    for eps in [1.0, 0.3, 0.1, 0.05] {
        let want = 2.0 + eps / (2.0 * PI) * (1.0 - (2.0 * PI / eps).cos());
        let got = density_integral(&Density::oscillating(eps).unwrap()).unwrap().value;
        assert!((got / want - 1.0).abs() < 1e-12, "{eps}");
    }
    for r in [0.1, 0.5] {
        let want = PI * (1.0 - r * r);
        let got = density_integral(&Density::annulus(r).unwrap()).unwrap().value;
        assert!((got / want - 1.0).abs() < 1e-12, "{r}");
    }
}

#[test]
fn builtins_are_positive_over_their_ranges() {
    for alpha in [-0.99, -0.5, 0.0, 1.0, 100.0] {
        assert!(validate_positivity(&Density::borg(alpha).unwrap()).is_ok());
    }
    for eps in [0.01, 0.1, 1.0, 10.0] {
        assert!(validate_positivity(&Density::oscillating(eps).unwrap()).is_ok());
    }
    for r in [1e-6, 0.5, 0.999] {
        assert!(validate_positivity(&Density::annulus(r).unwrap()).is_ok());
    }
    assert!(validate_positivity(&Density::uniform(2.0).unwrap()).is_ok());
    let bad = Density::expression("x", &BTreeMap::new(), 1.0).unwrap();
    assert!(validate_positivity(&bad).is_err());
}

#[test]
fn oscillating_hierarchy() {
    for eps in [0.1, 0.05] {
        let e = e0_coefficients_kernel(&Density::oscillating(eps).unwrap(), Neumann).unwrap();
        assert!((e.e2 / e.e1).abs() < 5.0 * eps * eps, "{eps}: {e:?}");
        assert!((e.e3 / e.e2).abs() < 5.0 * eps, "{eps}: {e:?}");
    }
}

#[test]
fn kernel_and_matrix_routes_agree() {
    for d in [Density::borg(1.0).unwrap(), Density::oscillating(1.0).unwrap(), Density::oscillating(0.3).unwrap()] {
        for bc in [Neumann, Periodic] {
            let k = e0_coefficients_kernel(&d, bc).unwrap();
            let m = e0_coefficients(&d, bc, 512).unwrap();
            assert!((k.e1 - m.e1).abs() < 1e-12);
            assert!((k.e2 - m.e2).abs() < 1e-8, "{} {bc}: {} {}", d.name(), k.e2, m.e2);
            assert!((k.e3 - m.e3).abs() < 1e-8 + m.e3_error, "{} {bc}: {} {}", d.name(), k.e3, m.e3);
        }
    }
}

#[test]
fn dirichlet_has_no_zero_mode_pieces() {
    let r = z2(&Density::oscillating(0.5).unwrap(), Dirichlet).unwrap();
    assert_eq!(r.g1_term, 0.0);
    assert_eq!(r.zero_mode_subtraction, 0.0);
    assert!(r.e0_coefficients.is_none());
    assert_eq!(r.value, r.trace_term);
}

#[test]
fn rectangle_densities_need_the_annulus_route() {
    let d = Density::annulus(0.5).unwrap();
    assert!(z1(&d, Neumann).is_err());
    assert!(z2(&d, Periodic).is_err());
    assert!(z2(&d, Neumann).is_ok());
}
