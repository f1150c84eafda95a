//! Neumann spectrum of the unit disk (`r_min = 0`) or the annulus `r_min < r < 1`.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::bessel::{annulus_cross, bessel_jp};
use super::roots::brent;
use super::{Level, Method, Spectrum};
use crate::error::{Error, Result};

const STEP: f64 = 0.1;

/// Roots below `x_max` of the radial function for angular order `n`.
fn roots_below(n: usize, r_min: f64, x_max: f64) -> Result<Vec<f64>> {
    let f = |x: f64| {
        if r_min == 0.0 {
            bessel_jp(n, x)
        } else {
            annulus_cross(n, r_min, x)
        }
    };
    let start = if n == 0 { 0.05 } else { n as f64 };
    let mut out = Vec::new();
    let (mut x0, mut f0) = (start, f(start));
    while x0 < x_max {
        let x1 = (x0 + STEP).min(x_max);
        let f1 = f(x1);
        if f0.signum() != f1.signum() && f0 != 0.0 {
            let r = brent(f, x0, x1, f0, f1, 1e-14 * x1)
                .ok_or_else(|| Error::Eigen(format!("root refinement failed for order {n}")))?;
            out.push(r);
        }
        if x1 >= x_max {
            break;
        }
        x0 = x1;
        f0 = f1;
    }
    Ok(out)
}

/// Weyl estimate of the radius `√E` holding `count` Neumann eigenvalues.
fn weyl_radius(r_min: f64, count: usize) -> f64 {
    let area = PI * (1.0 - r_min * r_min);
    let perimeter = 2.0 * PI * (1.0 + r_min);
    // count = area E/4π + perimeter √E/4π
    let (a, b) = (area / (4.0 * PI), perimeter / (4.0 * PI));
    let c = count as f64;
    (-b + (b * b + 4.0 * a * c).sqrt()) / (2.0 * a)
}

/// First `count` nonzero Neumann eigenvalues; angular orders `n ≥ 1` are doubly degenerate.
pub fn disk_annulus_spectrum(r_min: f64, count: usize) -> Result<Spectrum> {
    if !(0.0..1.0).contains(&r_min) {
        return Err(Error::Parameter(format!("inner radius {r_min} outside [0, 1)")));
    }
    if count == 0 {
        return Err(Error::Parameter("count must be at least 1".into()));
    }
    let mut x_max = weyl_radius(r_min, count) * 1.05 + 2.0;
    loop {
        let orders = x_max.ceil() as usize + 1;
        let per_order = (0..orders)
            .into_par_iter()
            .map(|n| roots_below(n, r_min, x_max).map(|r| (n, r)))
            .collect::<Result<Vec<_>>>()?;
        let mut levels: Vec<Level> = per_order
            .into_iter()
            .flat_map(|(n, roots)| {
                roots.into_iter().map(move |x| Level {
                    value: x * x,
                    multiplicity: if n == 0 { 1 } else { 2 },
                    accuracy: Some(2.0 * x * (1e-14 * x + 2.0 * f64::EPSILON * x)),
                })
            })
            .collect();
        levels.sort_by(|a, b| a.value.total_cmp(&b.value));
        let total: usize = levels.iter().map(|l| l.multiplicity).sum();
        if total >= count {
            let mut s = Spectrum {
                levels,
                method: Method::Bessel,
                zero_mode_removed: true,
            };
            s.truncate(count);
            return Ok(s);
        }
        x_max *= 1.2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_lowest_level() {
        let s = disk_annulus_spectrum(0.0, 5).unwrap();
        assert!((s.levels[0].value - 1.841_183_781_340_659f64.powi(2)).abs() < 1e-10);
        assert_eq!(s.levels[0].multiplicity, 2);
        assert_eq!(s.count(), 5);
    }

    #[test]
    fn thin_annulus_orders() {
        let disk = disk_annulus_spectrum(0.0, 3).unwrap();
        let ring = disk_annulus_spectrum(0.9, 3).unwrap();
        // angular order 1 on a thin ring: E ≈ 1/r̄² with r̄ = 0.95, below the disk
        assert!((ring.levels[0].value - 1.0 / 0.95f64.powi(2)).abs() < 0.05);
        assert!(ring.levels[0].value < disk.levels[0].value);
        // the radial mode is pushed up to about (π/0.1)²
        let radial = roots_below(0, 0.9, 40.0).unwrap()[0];
        assert!((radial * radial / (PI / 0.1).powi(2) - 1.0).abs() < 0.01);
        assert!(radial * radial > disk.levels[0].value);
    }
}
