//! Closed-form values for the catalogued problems.

use std::f64::consts::PI;

use crate::density::Builtin;
use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;

/// Exact (or, for the annulus, small-`r_min` asymptotic) value of `Z_order`.
pub fn reference_value(problem: &Builtin, bc: BoundaryCondition, order: u8) -> Result<f64> {
    use BoundaryCondition::*;
    let missing = || {
        Error::Uncatalogued(format!(
            "no closed form for {problem:?} with {bc} ends at order {order}"
        ))
    };
    match (*problem, bc, order) {
        (Builtin::Uniform { length }, _, 1 | 2) => Ok(uniform(length, bc, order)),
        (Builtin::Borg { .. }, Dirichlet, 1 | 2) => Ok(uniform(1.0, bc, order)),
        (Builtin::Borg { alpha }, Neumann, 1) => Ok(borg_z1_nn(alpha)),
        (Builtin::Borg { alpha }, Periodic, 1) => Ok(borg_z1_pp(alpha)),
        (Builtin::Borg { alpha }, Neumann, 2) => Ok(borg_z2_nn(alpha)),
        (Builtin::Borg { alpha }, Periodic, 2) => Ok(borg_z2_pp(alpha)),
        (Builtin::Oscillating { epsilon, phase }, Neumann, 1) if phase == 0.0 && whole_periods(epsilon) => {
            Ok(oscillating_z1(epsilon))
        }
        (Builtin::Oscillating { epsilon, phase }, Neumann, 2) if phase == 0.0 && epsilon == 1.0 => {
            Ok(oscillating_z2_unit())
        }
        (Builtin::Annulus { r_min }, Neumann, 2) => Ok(annulus_z2_asymptotic(r_min)),
        _ => Err(missing()),
    }
}

/// The closed first-order form needs a whole number of periods on the interval.
fn whole_periods(eps: f64) -> bool {
    let n = 1.0 / eps;
    (n - n.round()).abs() < 1e-12 * n
}

fn uniform(a: f64, bc: BoundaryCondition, order: u8) -> f64 {
    let a2 = a * a;
    match (bc, order) {
        (BoundaryCondition::Periodic, 1) => a2 / 12.0,
        (BoundaryCondition::Periodic, _) => a2 * a2 / 720.0,
        (_, 1) => a2 / 6.0,
        _ => a2 * a2 / 90.0,
    }
}

fn borg_quad(alpha: f64) -> f64 {
    alpha * alpha + 3.0 * alpha + 3.0
}

pub fn borg_z1_nn(alpha: f64) -> f64 {
    (alpha * alpha + 5.0 * alpha + 5.0) / (10.0 * borg_quad(alpha))
}

/// Unit length.
pub fn borg_z1_pp(alpha: f64) -> f64 {
    let q = borg_quad(alpha);
    (5.0 * q * q - alpha * alpha * (alpha * (5.0 * alpha + 12.0) + 12.0))
        / (180.0 * (alpha + 1.0) * q)
}

pub fn borg_z2_nn(alpha: f64) -> f64 {
    let q = borg_quad(alpha);
    let num = alpha.powi(4) + 10.0 * alpha.powi(3) + 45.0 * alpha * alpha + 70.0 * alpha + 35.0;
    num / (350.0 * q * q)
}

pub fn borg_z2_pp(alpha: f64) -> f64 {
    let q = borg_quad(alpha);
    let num = 24.0 * alpha.powi(4) + 100.0 * alpha.powi(3) + 205.0 * alpha * alpha + 210.0 * alpha + 105.0;
    num / (8400.0 * q * q)
}

/// First-order sum rule for `1/ε` a whole number.
pub fn oscillating_z1(eps: f64) -> f64 {
    let (p, e) = (PI, eps);
    let s1 = (p / e).sin();
    let first = (e * (2.0 * p / e).sin() * ((2.0 * p * p - 3.0 * e * e) * s1 + 3.0 * p * e * (p / e).cos())
        + 2.0 * p.powi(3))
        / (6.0 * p.powi(3));
    let second = e * e * second_order_numerator(e) / (96.0 * p.powi(3) * (e * s1 * s1 + 2.0 * p));
    first + second
}

fn second_order_numerator(e: f64) -> f64 {
    let p = PI;
    18.0 * e * e - 8.0 * (3.0 * e * e + p * p) * (2.0 * p / e).cos()
        + (6.0 * e * e - 4.0 * p * p) * (4.0 * p / e).cos()
        + 9.0 * p * e * (4.0 * p / e).sin()
        - 24.0 * p * p
}

/// Z₂ at ε = 1.
pub fn oscillating_z2_unit() -> f64 {
    2.0 / 45.0 - 271.0 / (256.0 * PI.powi(4)) + 1.0 / (24.0 * PI * PI)
}

/// Leading small-ε behaviour of Z₂.
pub fn oscillating_z2_small_eps(eps: f64) -> f64 {
    let (p, e) = (PI, eps);
    let c = |k: f64| (k * p / e).cos();
    2.0 / 45.0 + 2.0 * e * (c(1.0) - c(3.0)) / (45.0 * p)
        + e * e * (12.0 * c(2.0) * c(2.0) - 9.0 * c(2.0) - 15.0 * c(4.0) + 10.0 * c(6.0) + 32.0)
            / (720.0 * p * p)
}

/// `[e1, e2, e3]` for the oscillating string.
pub fn oscillating_e0(eps: f64) -> [f64; 3] {
    let (p, e) = (PI, eps);
    let s1 = (p / e).sin();
    let base = e * s1 * s1 + 2.0 * p;
    let e1 = p / base;
    let e2 = e * e * second_order_numerator(e) / (96.0 * p * base.powi(3));

    let c = |k: f64| (k * p / e).cos();
    let s = |k: f64| (k * p / e).sin();
    let (e2p, e3p, e4p, e5p) = (e * e, e.powi(3), e.powi(4), e.powi(5));
    let (p2, p3, p4, p5) = (p * p, p.powi(3), p.powi(4), p.powi(5));
    let odd = e3p - 94.0 * p * e2p + 20.0 * p2 * e + 32.0 * p3;
    let bracket = 45.0 * p * (e2p - 16.0 * p2) * e2p * s(8.0)
        - 24.0 * (15.0 * e4p + 35.0 * p2 * e2p - 8.0 * p4) * e * c(8.0)
        - 180.0 * p * odd * e * s(2.0)
        - 90.0 * p * (-3.0 * e3p + 376.0 * p * e2p + 192.0 * p2 * e + 64.0 * p3) * e * s(4.0)
        - 180.0 * p * odd * e * s(6.0)
        + 24.0 * (-420.0 * e5p - 2160.0 * p * e4p - 95.0 * p2 * e3p + 384.0 * p4 * e + 64.0 * p5) * c(4.0)
        + 24.0 * (840.0 * e4p + 5400.0 * p * e3p + 445.0 * p2 * e2p - 1860.0 * p3 * e + 712.0 * p4) * e * c(2.0)
        - 40.0
            * (315.0 * e5p + 2160.0 * p * e4p + 150.0 * p2 * e3p - 1464.0 * p3 * e2p - 600.0 * p4 * e
                + 64.0 * p5)
        + 8.0
            * (360.0 * e5p + 1080.0 * p * e4p - 195.0 * p2 * e3p - 1740.0 * p3 * e2p + 168.0 * p4 * e
                + 128.0 * p5)
            * c(6.0);
    let e3 = e3p * bracket / (5760.0 * p3 * (e - e * c(2.0) + 4.0 * p).powi(5));
    [e1, e2, e3]
}

/// Leading small-ε forms of the three coefficients.
pub fn oscillating_e0_small_eps(eps: f64) -> [f64; 3] {
    let (p, e) = (PI, eps);
    let c = |k: f64| (k * p / e).cos();
    let s1 = (p / e).sin();
    [
        0.5 - e * s1 * s1 / (4.0 * p),
        -e * e * (2.0 * c(2.0) + c(4.0) + 6.0) / (192.0 * p * p),
        e.powi(3) * (3.0 * c(4.0) + 2.0 * c(6.0) - 5.0) / (11520.0 * p.powi(3)),
    ]
}

/// `[e1, e2, e3]` for the annulus in closed form. This `e1` is half the
/// value the integrals give; the sum rule uses the integrals.
pub fn annulus_e0(r: f64) -> [f64; 3] {
    let l = r.ln();
    let r2 = r * r;
    let r4 = r2 * r2;
    let d = r2 - 1.0;
    let e1 = -l / (1.0 - r2);
    let e2 = l * (6.0 * d * d + l * (-9.0 * r4 + 4.0 * (r4 + r2 + 1.0) * l + 9.0)) / (6.0 * (1.0 - r2).powi(3));
    let e3 = -(r2 + 1.0) * l * l / (16.0 * d * d) + l / (2.0 - 2.0 * r2)
        + (14.0 * r4 + 41.0 * r2 + 14.0) * l.powi(3) / (12.0 * d.powi(3))
        - (2.0 * r4 * r2 + 7.0 * r4 + 7.0 * r2 + 2.0) * l.powi(4) / (2.0 * d.powi(4))
        + 2.0 * (2.0 * r4 * r4 + 7.0 * r4 * r2 + 12.0 * r4 + 7.0 * r2 + 2.0) * l.powi(5) / (15.0 * d.powi(5));
    [e1, e2, e3]
}

/// The `−(2/V) Tr[Σ G⁽¹⁾ Σ]` term of the annulus in closed form.
pub fn annulus_g1_term(r: f64) -> f64 {
    let l = r.ln();
    let (l2, r2) = (l * l, r * r);
    let r4 = r2 * r2;
    r4 / 12.0 - r4 * l2 / 90.0 + 3.0 * r4 / (32.0 * l2) - 5.0 * r4 / (32.0 * l) + r2 / 12.0
        - 7.0 * r2 * l2 / 360.0
        - 3.0 * r2 / (16.0 * l2)
        - l2 / 90.0
        + 3.0 / (32.0 * l2)
        + 5.0 / (32.0 * l)
        + 1.0 / 12.0
}

/// Small-`r_min` expansion of the annulus Z₂.
pub fn annulus_z2_asymptotic(r: f64) -> f64 {
    annulus_z2_limit() + 139.0 * r * r / 96.0
}

pub fn annulus_z2_limit() -> f64 {
    5.0 * PI * PI / 48.0 - 155.0 / 192.0
}

/// Z₂ of the Neumann unit disk quoted from a 2000-level Bessel computation.
pub const DISK_Z2_QUOTED: f64 = 0.220_792_125_8;
