use proptest::prelude::*;
use sumrules::density::IntervalDomain;
use sumrules::kernels::{convolve_gq, eval_g0, eval_g1, spectral_series_oracle, GreensKernel};
use sumrules::quadrature::{integrate_1d, Quad};
use sumrules::BoundaryCondition::{self, *};

const ALL: [BoundaryCondition; 3] = [Dirichlet, Neumann, Periodic];

fn point(a: f64, t: f64) -> f64 {
    (t - 0.5) * a
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn closed_forms_are_symmetric(a in 0.1f64..10.0, s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let (x, y) = (point(a, s), point(a, t));
        for bc in ALL {
            prop_assert_eq!(eval_g0(bc, a, x, y).unwrap(), eval_g0(bc, a, y, x).unwrap());
        }
        for bc in [Neumann, Periodic] {
            let (g, h) = (eval_g1(bc, a, x, y).unwrap(), eval_g1(bc, a, y, x).unwrap());
            prop_assert!((g - h).abs() <= 4.0 * f64::EPSILON * a.powi(3).max(1.0), "{} {}", g, h);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn zero_mode_orthogonality(a in 0.2f64..5.0, s in 0.0f64..=1.0) {
        let x = point(a, s);
        for bc in [Neumann, Periodic] {
            let q0 = integrate_1d(|y| eval_g0(bc, a, x, y).unwrap(), -a / 2.0, a / 2.0, 1e-13, &[x]).unwrap();
            prop_assert!(q0.value.abs() < 1e-10, "{:?} {}", bc, q0.value);
            let q1 = integrate_1d(|y| eval_g1(bc, a, x, y).unwrap(), -a / 2.0, a / 2.0, 1e-13, &[x]).unwrap();
            prop_assert!(q1.value.abs() < 1e-10, "{:?} {}", bc, q1.value);
        }
    }

    #[test]
    fn continuous_across_the_diagonal(a in 0.2f64..5.0, s in 0.01f64..0.99) {
        let x = point(a, s);
        let h = 1e-9 * a;
        for bc in ALL {
            let jump = eval_g0(bc, a, x, x + h).unwrap() - eval_g0(bc, a, x, x - h).unwrap();
            prop_assert!(jump.abs() < 1e-8 * a);
        }
    }

    #[test]
    fn recurrence_reproduces_first_order(s in 0.0f64..=1.0, t in 0.0f64..=1.0) {
        let dom = IntervalDomain::new(1.0).unwrap();
        for bc in [Neumann, Periodic] {
            let g0 = GreensKernel::closed(bc, dom, 0).unwrap();
            let g1 = convolve_gq(&g0, &g0).unwrap();
            let (x, y) = (point(1.0, s), point(1.0, t));
            let want = eval_g1(bc, 1.0, x, y).unwrap();
            prop_assert!((g1.eval(x, y).unwrap() - want).abs() < 1e-12, "{:?}", bc);
        }
    }
}

#[test]
fn closed_forms_match_mode_series() {
    let pts = [(-0.5, -0.5), (-0.3, 0.1), (0.0, 0.0), (0.2, 0.45), (0.5, -0.5)];
    for bc in ALL {
        for q in 0..=1usize {
            if bc == Dirichlet && q == 1 {
                continue;
            }
            for modes in [100, 1000, 10_000] {
                for &(x, y) in &pts {
                    let closed = if q == 0 {
                        eval_g0(bc, 1.0, x, y).unwrap()
                    } else {
                        eval_g1(bc, 1.0, x, y).unwrap()
                    };
                    let s = spectral_series_oracle(bc, 1.0, q, x, y, modes).unwrap();
                    assert!(
                        (closed - s.value).abs() <= s.tail_bound + 1e-15,
                        "{bc:?} q={q} M={modes} ({x},{y}): {closed} vs {}",
                        s.value
                    );
                }
            }
        }
    }
}

#[test]
fn first_order_traces() {
    for a in [0.5, 1.0, 2.0, 3.7] {
        let h = a / 2.0;
        let nn = Quad::new(0.0).rel(1e-13).integrate(|x| eval_g1(Neumann, a, x, x).unwrap(), -h, h, &[]).unwrap();
        let pp = Quad::new(0.0).rel(1e-13).integrate(|x| eval_g1(Periodic, a, x, x).unwrap(), -h, h, &[]).unwrap();
        let a4 = a.powi(4);
        assert!((nn.value / (a4 / 90.0) - 1.0).abs() < 1e-12);
        assert!((pp.value / (a4 / 720.0) - 1.0).abs() < 1e-12);
    }
}

#[test]
fn out_of_domain_is_rejected() {
    assert!(eval_g0(Neumann, 1.0, 0.6, 0.0).is_err());
    assert!(eval_g1(Periodic, 1.0, 0.0, -0.51).is_err());
    assert!(eval_g0(Neumann, -1.0, 0.0, 0.0).is_err());
}

#[test]
fn quadrature_is_honest_and_deterministic() {
    let cases: [(fn(f64) -> f64, f64, f64, f64); 4] = [
        (|x| x.exp(), 0.0, 2.0, 2f64.exp() - 1.0),
        (|x| 1.0 / (1.0 + x * x), -3.0, 3.0, 2.0 * 3f64.atan()),
        (|x| x.abs().sqrt(), 0.0, 1.0, 2.0 / 3.0),
        (|x| (10.0 * x).sin().powi(2), 0.0, 1.0, 0.5 - (20f64).sin() / 40.0),
    ];
    for (f, a, b, truth) in cases {
        let r = integrate_1d(f, a, b, 1e-12, &[]).unwrap();
        assert!((r.value - truth).abs() <= 10.0 * r.error_estimate.max(1e-16), "{} {}", r.value, truth);
        let again = integrate_1d(f, a, b, 1e-12, &[]).unwrap();
        assert_eq!(r.value.to_bits(), again.value.to_bits());
    }
}
