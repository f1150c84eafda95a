//! Periodic ends through the transfer matrix over one period.
//!
//! Periodic eigenvalues are the roots of `D(E) = tr M − 2`. The pair at level
//! `l` straddles the Dirichlet eigenvalue `μ_{2l}`: one root lies in
//! `[μ_{2l−1}, μ_{2l}]`, the other in `[μ_{2l}, μ_{2l+1}]`. At any `μ`,
//! `D − 2 = (m₁₁ − 1)²/m₁₁`, so the signs at the bracket ends are known and a
//! vanishing gap is detected directly from `M ≈ I`.

use rayon::prelude::*;

use crate::density::Density;
use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;

use super::pruefer::{Liouville, SlOptions};
use super::roots::brent;
use super::{Level, Method, Spectrum};

const COEXISTENCE: f64 = 1e-7;

fn discriminant(sl: &Liouville<'_>, k: f64, level: usize) -> f64 {
    let m = sl.transfer(k, level);
    m[0][0] + m[1][1] - 2.0
}

/// Lower and upper periodic eigenvalue of level `l ≥ 1`, with error estimates.
/// `mu` holds Dirichlet wave numbers `μ_{2l−1}, μ_{2l}, μ_{2l+1}`.
fn level_pair(sl: &Liouville<'_>, mu: [f64; 3], opts: &SlOptions) -> Result<[(f64, f64); 2]> {
    let level = sl.level_for(mu[2], opts.rel_tol);
    let m = sl.transfer(mu[1], level);
    let k = mu[1];
    let close = |v: f64| v.abs() < COEXISTENCE;
    if close(m[0][0] - 1.0) && close(m[1][1] - 1.0) && close(m[1][0] / k) {
        return Ok([(k, 0.0), (k, 0.0)]);
    }
    let mut out = [(0.0, 0.0); 2];
    for (slot, (lo, hi)) in [(mu[0], mu[1]), (mu[1], mu[2])].into_iter().enumerate() {
        let f = |x: f64| discriminant(sl, x, level);
        let (flo, fhi) = (f(lo), f(hi));
        let root = brent(f, lo, hi, flo, fhi, 4.0 * f64::EPSILON * hi).ok_or_else(|| {
            Error::Eigen(format!(
                "periodic bracket [{lo}, {hi}] has no sign change ({flo:e}, {fhi:e})"
            ))
        })?;
        // slope from the bracket, mesh error from one coarser level
        let slope = ((fhi - flo) / (hi - lo)).abs().max(f64::MIN_POSITIVE);
        let mesh_err = if level > 0 && !sl.is_flat() {
            (f(root) - discriminant(sl, root, level - 1)).abs() / 15.0
        } else {
            0.0
        };
        let d2 = f(root).abs();
        out[slot] = (root, (mesh_err + d2) / slope + 4.0 * f64::EPSILON * root);
    }
    Ok(out)
}

/// First `count` nonzero periodic eigenvalues (counted with multiplicity).
pub fn spectrum(d: &Density, count: usize, opts: &SlOptions) -> Result<Spectrum> {
    let sl = Liouville::new(d)?;
    let levels_needed = count.div_ceil(2);
    let mu = (1..=2 * levels_needed + 1)
        .into_par_iter()
        .map(|j| sl.eigen_k(BoundaryCondition::Dirichlet, j, opts).map(|r| r.0))
        .collect::<Result<Vec<_>>>()?;
    let pairs = (1..=levels_needed)
        .into_par_iter()
        .map(|l| level_pair(&sl, [mu[2 * l - 2], mu[2 * l - 1], mu[2 * l]], opts))
        .collect::<Result<Vec<_>>>()?;
    let mut levels = Vec::with_capacity(count);
    for [(k1, e1), (k2, e2)] in pairs {
        if k1 == k2 {
            levels.push(Level {
                value: k1 * k1,
                multiplicity: 2,
                accuracy: Some(2.0 * k1 * e1),
            });
        } else {
            for (k, e) in [(k1, e1), (k2, e2)] {
                levels.push(Level {
                    value: k * k,
                    multiplicity: 1,
                    accuracy: Some(2.0 * k * e),
                });
            }
        }
    }
    let mut s = Spectrum {
        levels,
        method: Method::Monodromy,
        zero_mode_removed: true,
    };
    s.truncate(count);
    Ok(s)
}
