//! Bessel functions of integer order and the roots needed for Neumann disks
//! and annuli.
//!
//! `J_n` comes from Miller's backward recurrence normalized by
//! `J₀ + 2ΣJ_{2k} = 1`, which is accurate for every order at once. `Y₀` and
//! `Y₁` use the Neumann series in the same `J` values; higher `Y_n` follow by
//! forward recurrence, which is stable for the growing solution.

use std::f64::consts::PI;

use super::roots::brent;
use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SCAN_STEP: f64 = 0.1;

/// `J_0 … J_m(x)` for some `m ≥ nmax`, `x ≥ 0`.
fn miller(nmax: usize, x: f64) -> Vec<f64> {
    if x == 0.0 {
        let mut v = vec![0.0; nmax + 1];
        v[0] = 1.0;
        return v;
    }
    let top = nmax.max(x.ceil() as usize);
    let mut m = top + 30 + (50.0 * top as f64).sqrt() as usize;
    m += m % 2;
    let mut j = vec![0.0; m + 1];
    let (mut next, mut cur) = (0.0_f64, 1e-30_f64);
    let mut norm = 0.0;
    for k in (0..=m).rev() {
        j[k] = cur;
        if k % 2 == 0 {
            norm += if k == 0 { cur } else { 2.0 * cur };
        }
        if k == 0 {
            break;
        }
        let prev = 2.0 * k as f64 / x * cur - next;
        next = cur;
        cur = prev;
        if cur.abs() > 1e250 {
            let s = 1e-250;
            for v in j[k..].iter_mut() {
                *v *= s;
            }
            norm *= s;
            cur *= s;
            next *= s;
        }
    }
    for v in j.iter_mut() {
        *v /= norm;
    }
    j
}

/// `J_0 … J_nmax(x)`.
pub fn bessel_j_all(nmax: usize, x: f64) -> Vec<f64> {
    let mut j = miller(nmax, x.abs());
    j.truncate(nmax + 1);
    if x < 0.0 {
        for (n, v) in j.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    j
}

pub fn bessel_j(n: usize, x: f64) -> f64 {
    bessel_j_all(n, x)[n]
}

/// `J_0 … J_nmax` and `Y_0 … Y_nmax` at `x > 0`. `Y` entries may overflow to −∞.
pub fn bessel_jy_all(nmax: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let nmax = nmax.max(1);
    let j = miller(nmax, x);
    let log_term = (0.5 * x).ln() + EULER_GAMMA;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    let mut k = 1;
    while 2 * k + 1 < j.len() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        s0 += sign * j[2 * k] / k as f64;
        s1 += sign * (j[2 * k - 1] - j[2 * k + 1]) / k as f64;
        k += 1;
    }
    let y0 = 2.0 / PI * log_term * j[0] - 4.0 / PI * s0;
    let y1 = -2.0 / PI * (j[0] / x - log_term * j[1] - s1);
    let mut y = vec![y0, y1];
    for n in 1..nmax {
        let next = 2.0 * n as f64 / x * y[n] - y[n - 1];
        y.push(if next.is_finite() { next } else { f64::NEG_INFINITY });
    }
    (j[..=nmax].to_vec(), y)
}

pub fn bessel_y(n: usize, x: f64) -> f64 {
    bessel_jy_all(n + 1, x).1[n]
}

fn prime(v: &[f64], n: usize) -> f64 {
    if n == 0 {
        -v[1]
    } else {
        0.5 * (v[n - 1] - v[n + 1])
    }
}

/// `J_n′(x)`.
pub fn bessel_jp(n: usize, x: f64) -> f64 {
    prime(&bessel_j_all(n + 1, x), n)
}

/// `Y_n′(x)`.
pub fn bessel_yp(n: usize, x: f64) -> f64 {
    prime(&bessel_jy_all(n + 1, x).1, n)
}

/// `J_n′(x r) Y_n′(x) − J_n′(x) Y_n′(x r)` divided by `|(J_n′, Y_n′)(x r)|`,
/// which keeps it bounded as `x r → 0`.
pub fn annulus_cross(n: usize, r_min: f64, x: f64) -> f64 {
    let (jo, yo) = bessel_jy_all(n + 1, x);
    let (ji, yi) = bessel_jy_all(n + 1, x * r_min);
    let (jpo, ypo) = (prime(&jo, n), prime(&yo, n));
    let (jpi, ypi) = (prime(&ji, n), prime(&yi, n));
    if !ypi.is_finite() || ypi.abs() > 1e200 {
        return -jpo;
    }
    (jpi * ypo - jpo * ypi) / jpi.hypot(ypi)
}

fn scan_roots<F: Fn(f64) -> f64>(f: F, start: f64, count: usize, step: f64) -> Result<Vec<f64>> {
    let mut roots = Vec::with_capacity(count);
    let (mut x0, mut f0) = (start, f(start));
    let limit = start + 10.0 * (count as f64 + 10.0) * PI / step.min(1.0) + 1000.0;
    while roots.len() < count {
        let x1 = x0 + step;
        let f1 = f(x1);
        if f0 == 0.0 {
            roots.push(x0);
        } else if f0.signum() != f1.signum() && f1 != 0.0 {
            let r = brent(&f, x0, x1, f0, f1, 1e-13 * x1).ok_or_else(|| Error::Eigen("root refinement failed".into()))?;
            roots.push(r);
        }
        x0 = x1;
        f0 = f1;
        if x0 > limit {
            return Err(Error::Eigen(format!("scan found only {} roots", roots.len())));
        }
    }
    Ok(roots)
}

/// First `count` positive roots of `J_n′` (the root at 0 for `n = 0` excluded).
pub fn bessel_deriv_roots(n: usize, count: usize) -> Result<Vec<f64>> {
    let start = if n == 0 { 0.5 } else { n as f64 };
    scan_roots(|x| bessel_jp(n, x), start, count, SCAN_STEP)
}

/// First `count` roots of the annulus cross product for angular order `n`.
pub fn annulus_cross_roots(n: usize, r_min: f64, count: usize) -> Result<Vec<f64>> {
    if !(r_min > 0.0 && r_min < 1.0) {
        return Err(Error::Parameter(format!("inner radius {r_min} outside (0, 1)")));
    }
    let start = if n == 0 { 0.05 } else { n as f64 };
    scan_roots(|x| annulus_cross(n, r_min, x), start, count, SCAN_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        let cases = [
            (bessel_j(0, 1.0), 0.765_197_686_557_966_6),
            (bessel_j(1, 1.0), 0.440_050_585_744_933_5),
            (bessel_y(0, 1.0), 0.088_256_964_215_676_96),
            (bessel_y(1, 1.0), -0.781_212_821_300_288_7),
            (bessel_j(0, 10.0), -0.245_935_764_451_348_3),
            (bessel_y(0, 10.0), 0.055_671_167_283_599_39),
        ];
        for (got, want) in cases {
            assert!((got - want).abs() < 1e-13, "{got} {want}");
        }
    }

    #[test]
    fn first_derivative_roots() {
        let r = bessel_deriv_roots(1, 2).unwrap();
        assert!((r[0] - 1.841_183_781_340_659).abs() < 1e-11);
        let r0 = bessel_deriv_roots(0, 1).unwrap()[0];
        assert!((r0 - 3.831_705_970_207_512).abs() < 1e-11);
    }
}
