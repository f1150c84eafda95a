//! Shooting for `−ψ″ = k² Σ ψ` in Liouville–Prüfer variables.
//!
//! With `dt = √Σ dx` and `w = Σ^{1/4} ψ` the problem becomes
//! `−w_tt + q w = k² w`, `q = Σ″/(4Σ²) − 5Σ′²/(16Σ³)`. Writing
//! `w = R sin θ`, `w_t = k R cos θ` gives
//!
//! ```text
//! θ′ = k√Σ − (g/k) sin²θ,    (ln R)′ = (g/2k) sin 2θ,    g = √Σ q
//! ```
//!
//! in the original coordinate. The fast part `k P(x)`, `P = ∫√Σ`, is taken
//! out exactly and only the slow remainder `φ = θ − kP` is integrated (RK4 on
//! a cached uniform mesh). Densities with `q ≡ 0` need no integration at all.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;

use crate::density::{validate_positivity, Density};
use crate::error::{Error, Result};
use crate::kernels::BoundaryCondition;
use crate::quadrature::gl_nodes;

use super::{Level, Method, Spectrum};

const BASE_CELLS: usize = 64;
const MAX_LEVEL: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlOptions {
    /// Target relative accuracy of each eigenvalue.
    pub rel_tol: f64,
}

impl Default for SlOptions {
    fn default() -> Self {
        SlOptions { rel_tol: 1e-12 }
    }
}

/// g and P at every half step of a uniform mesh.
struct Mesh {
    cells: usize,
    h: f64,
    g: Vec<f64>,
    phase: Vec<f64>,
}

/// Endpoint data: `β = Σ′/(4Σ^{3/2})` and `f = Σ^{1/4}`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct End {
    pub beta: f64,
    pub f: f64,
    pub root: f64,
}

pub struct Liouville<'a> {
    d: &'a Density,
    lo: f64,
    a: f64,
    sigma_min: f64,
    sigma_max: f64,
    g_max: f64,
    flat: bool,
    min_cells: usize,
    total_phase: f64,
    pub(crate) left: End,
    pub(crate) right: End,
    meshes: Vec<OnceLock<Mesh>>,
}

fn g_of(d: &Density, x: f64) -> (f64, f64) {
    let j = d.jet(x);
    let s = j.v;
    let curv = j.d2 / (4.0 * s * s);
    let slope = 5.0 * j.d1 * j.d1 / (16.0 * s * s * s);
    (s.sqrt() * (curv - slope), s.sqrt() * (curv.abs() + slope.abs()))
}

fn end_data(d: &Density, x: f64) -> End {
    let j = d.jet(x);
    End {
        beta: j.d1 / (4.0 * j.v.powf(1.5)),
        f: j.v.powf(0.25),
        root: j.v.sqrt(),
    }
}

/// Cot⁻¹ with values in `(0, π)`.
fn arccot(u: f64) -> f64 {
    1f64.atan2(u)
}

impl<'a> Liouville<'a> {
    pub fn new(d: &'a Density) -> Result<Self> {
        let report = validate_positivity(d)?;
        let iv = d.interval();
        let (lo, a) = (iv.lo(), iv.length());
        let samples = 4096;
        let mut g_max = 0.0_f64;
        let mut scale = 0.0_f64;
        for i in 0..=samples {
            let (g, s) = g_of(d, lo + a * i as f64 / samples as f64);
            if !g.is_finite() {
                return Err(Error::Parameter("density derivatives are not finite".into()));
            }
            g_max = g_max.max(g.abs());
            scale = scale.max(s);
        }
        let flat = g_max <= 1e-12 * scale;
        let total_phase = d
            .quad(1e-14)
            .integrate(|x| d.eval(x).sqrt(), iv.lo(), iv.hi(), &[])?
            .value;
        Ok(Liouville {
            d,
            lo,
            a,
            sigma_min: report.min_value,
            sigma_max: report.max_value,
            // margin for peaks between samples
            g_max: 1.1 * g_max,
            flat,
            min_cells: (8 * BASE_CELLS).max(32 * d.panel_hint()),
            total_phase,
            left: end_data(d, iv.lo()),
            right: end_data(d, iv.hi()),
            meshes: (0..=MAX_LEVEL).map(|_| OnceLock::new()).collect(),
        })
    }

    /// `∫√Σ` over the interval.
    pub fn total_phase(&self) -> f64 {
        self.total_phase
    }

    pub fn is_flat(&self) -> bool {
        self.flat
    }

    fn mesh(&self, level: usize) -> &Mesh {
        self.meshes[level].get_or_init(|| {
            let cells = BASE_CELLS << level;
            let h = self.a / cells as f64;
            let half = 2 * cells + 1;
            let mut g = Vec::with_capacity(half);
            let mut phase = Vec::with_capacity(half);
            let mut pieces: Vec<f64> = Vec::with_capacity(half);
            for i in 0..half {
                let x = self.lo + 0.5 * h * i as f64;
                g.push(g_of(self.d, x).0);
                if i == 0 {
                    pieces.push(0.0);
                } else {
                    let x0 = x - 0.5 * h;
                    let piece: f64 = gl_nodes(x0, x).map(|(t, w)| w * self.d.eval(t).sqrt()).sum();
                    pieces.push(piece);
                }
            }
            // running compensated sum
            let (mut sum, mut comp) = (0.0_f64, 0.0_f64);
            for p in pieces {
                let t = sum + p;
                comp += if sum.abs() >= p.abs() { (sum - t) + p } else { (p - t) + sum };
                sum = t;
                phase.push(sum + comp);
            }
            Mesh {
                cells,
                h,
                g,
                phase,
            }
        })
    }

    /// Mesh level meeting the phase tolerance `tol·max(1, kL)` at wave number `k`.
    pub(crate) fn level_for(&self, k: f64, rel_tol: f64) -> usize {
        if self.flat {
            return 0;
        }
        let omega = 2.0 * k * self.sigma_max.sqrt();
        let tol = rel_tol * (k * self.total_phase).max(1.0);
        // Simpson-type bound for an oscillating forcing: a (g/k) (ωH)⁴ / 2880
        let bound = (2880.0 * tol * k / (self.g_max * self.a)).powf(0.25).min(1.0);
        let needed = ((omega * self.a / bound).ceil() as usize).max(self.min_cells);
        let mut level = 0;
        while (BASE_CELLS << level) < needed && level < MAX_LEVEL {
            level += 1;
        }
        level
    }

    /// Integrates `(φ, ∂φ/∂k)` from `θ(a) = theta0`; returns `θ(b)` and `∂θ(b)/∂k`.
    pub(crate) fn shoot(&self, k: f64, theta0: f64, dtheta0: f64, level: usize) -> (f64, f64) {
        if self.flat {
            return (k * self.total_phase + theta0, self.total_phase + dtheta0);
        }
        let m = self.mesh(level);
        let rhs = |i: usize, y: [f64; 2]| -> [f64; 2] {
            let p = m.phase[i];
            let th = k * p + y[0];
            let (s, c) = th.sin_cos();
            let gk = m.g[i] / k;
            [-gk * s * s, gk * s * s / k - gk * 2.0 * s * c * (p + y[1])]
        };
        let y = rk4(m, [theta0, dtheta0], rhs);
        let p_end = m.phase[2 * m.cells];
        (k * p_end + y[0], p_end + y[1])
    }

    /// Transfer matrix `[[ψ₁, ψ₂], [ψ₁′, ψ₂′]]` at `b` for unit data at `a`.
    pub(crate) fn transfer(&self, k: f64, level: usize) -> [[f64; 2]; 2] {
        let l = self.left;
        let th1 = arccot(l.beta / k);
        let r1 = (l.f * (1.0 + (l.beta / k).powi(2)).sqrt()).ln();
        let r2 = (l.f / (k * l.root)).ln();
        let (y, p_end) = if self.flat {
            ([th1, r1, 0.0, r2], self.total_phase)
        } else {
            let m = self.mesh(level);
            let rhs = |i: usize, y: [f64; 4]| -> [f64; 4] {
                let p = m.phase[i];
                let gk = m.g[i] / k;
                let (s1, c1) = (k * p + y[0]).sin_cos();
                let (s2, c2) = (k * p + y[2]).sin_cos();
                [-gk * s1 * s1, gk * s1 * c1, -gk * s2 * s2, gk * s2 * c2]
            };
            (rk4(m, [th1, r1, 0.0, r2], rhs), m.phase[2 * m.cells])
        };
        let r = self.right;
        let solution = |phi: f64, rho: f64| {
            let (s, c) = (k * p_end + phi).sin_cos();
            let amp = rho.exp();
            let w = amp * s;
            let wt = k * amp * c;
            (w / r.f, r.root * (wt - r.beta * w) / r.f)
        };
        let (a11, a21) = solution(y[0], y[1]);
        let (a12, a22) = solution(y[2], y[3]);
        [[a11, a12], [a21, a22]]
    }

    fn start(&self, bc: BoundaryCondition, k: f64) -> (f64, f64) {
        match bc {
            BoundaryCondition::Dirichlet => (0.0, 0.0),
            _ => {
                let b = self.left.beta;
                (arccot(b / k), b / (k * k + b * b))
            }
        }
    }

    fn target(&self, bc: BoundaryCondition, k: f64, n: usize) -> (f64, f64) {
        let base = n as f64 * PI;
        match bc {
            BoundaryCondition::Dirichlet => (base, 0.0),
            _ => {
                let b = self.right.beta;
                (base + arccot(b / k), b / (k * k + b * b))
            }
        }
    }

    /// Mismatch `θ(b) − target_n` and its k-derivative.
    fn mismatch(&self, bc: BoundaryCondition, k: f64, n: usize, level: usize) -> (f64, f64) {
        let (t0, dt0) = self.start(bc, k);
        let (th, dth) = self.shoot(k, t0, dt0, level);
        let (tg, dtg) = self.target(bc, k, n);
        (th - tg, dth - dtg)
    }

    /// Rigorous bracket for the n-th nonzero eigenvalue's wave number.
    pub(crate) fn bracket(&self, n: usize) -> (f64, f64) {
        let base = n as f64 * PI / self.a;
        (0.99 * base / self.sigma_max.sqrt(), 1.01 * base / self.sigma_min.sqrt())
    }

    /// Wave number of the n-th nonzero eigenvalue (n ≥ 1) and its error estimate.
    pub fn eigen_k(&self, bc: BoundaryCondition, n: usize, opts: &SlOptions) -> Result<(f64, f64)> {
        if bc == BoundaryCondition::Periodic || n == 0 {
            return Err(Error::Parameter("shooting handles n ≥ 1 with Dirichlet or Neumann ends".into()));
        }
        let (mut lo, mut hi) = self.bracket(n);
        let mut k = (n as f64 * PI / self.total_phase).clamp(lo, hi);
        let mut slope = self.total_phase;
        let mut last_step = f64::INFINITY;
        for _ in 0..200 {
            let level = self.level_for(k, opts.rel_tol);
            let (f, fp) = self.mismatch(bc, k, n, level);
            if !f.is_finite() {
                return Err(Error::Eigen(format!("non-finite phase at k = {k}")));
            }
            if f < 0.0 {
                lo = lo.max(k);
            } else {
                hi = hi.min(k);
            }
            let mut next = k - f / fp;
            if !(fp > 0.0) || !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            } else {
                slope = fp;
            }
            last_step = (next - k).abs();
            k = next;
            if last_step <= 4.0 * f64::EPSILON * k || hi - lo <= 4.0 * f64::EPSILON * hi {
                let level = self.level_for(k, opts.rel_tol);
                let err = if level > 0 && !self.flat {
                    let fine = self.mismatch(bc, k, n, level).0;
                    let coarse = self.mismatch(bc, k, n, level - 1).0;
                    (fine - coarse).abs() / 15.0 / slope
                } else {
                    0.0
                };
                return Ok((k, err + last_step + 2.0 * f64::EPSILON * k));
            }
        }
        Err(Error::Eigen(format!(
            "eigenvalue {n} did not converge (last step {last_step:e})"
        )))
    }

    /// Number of nonzero eigenvalues below `e`.
    pub fn count_below(&self, bc: BoundaryCondition, e: f64, opts: &SlOptions) -> usize {
        if e <= 0.0 {
            return 0;
        }
        let k = e.sqrt();
        let level = self.level_for(k, opts.rel_tol);
        let (f, _) = self.mismatch(bc, k, 0, level);
        if f <= 0.0 {
            0
        } else {
            (f / PI).floor() as usize
        }
    }
}

fn rk4<const N: usize, F: Fn(usize, [f64; N]) -> [f64; N]>(m: &Mesh, mut y: [f64; N], rhs: F) -> [f64; N] {
    let h = m.h;
    let axpy = |y: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *y;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    for j in 0..m.cells {
        let i = 2 * j;
        let k1 = rhs(i, y);
        let k2 = rhs(i + 1, axpy(&y, &k1, 0.5 * h));
        let k3 = rhs(i + 1, axpy(&y, &k2, 0.5 * h));
        let k4 = rhs(i + 2, axpy(&y, &k3, h));
        for c in 0..N {
            y[c] += h / 6.0 * (k1[c] + 2.0 * (k2[c] + k3[c]) + k4[c]);
        }
    }
    y
}

/// First `count` nonzero eigenvalues with Dirichlet or Neumann ends.
pub fn spectrum(d: &Density, bc: BoundaryCondition, count: usize, opts: &SlOptions) -> Result<Spectrum> {
    let sl = Liouville::new(d)?;
    let levels = (1..=count)
        .into_par_iter()
        .map(|n| {
            let (k, dk) = sl.eigen_k(bc, n, opts)?;
            Ok(Level {
                value: k * k,
                multiplicity: 1,
                accuracy: Some(2.0 * k * dk + dk * dk),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if levels.windows(2).any(|w| !(w[1].value > w[0].value)) {
        return Err(Error::Eigen("shooting produced a non-increasing sequence".into()));
    }
    Ok(Spectrum {
        levels,
        method: Method::Pruefer,
        zero_mode_removed: bc.has_zero_mode(),
    })
}

/// Number of nonzero eigenvalues below `e`, read off the Prüfer phase.
pub fn pruefer_count(d: &Density, bc: BoundaryCondition, e: f64) -> Result<usize> {
    Ok(Liouville::new(d)?.count_below(bc, e, &SlOptions::default()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use BoundaryCondition::*;

    #[test]
    fn uniform_and_borg_dirichlet() {
        let s = spectrum(&Density::uniform(1.0).unwrap(), Neumann, 3, &SlOptions::default()).unwrap();
        for (n, l) in s.levels.iter().enumerate() {
            let want = ((n + 1) as f64 * PI).powi(2);
            assert!((l.value - want).abs() < 1e-11 * want);
        }
        let s = spectrum(&Density::borg(1.0).unwrap(), Dirichlet, 5, &SlOptions::default()).unwrap();
        for (n, l) in s.levels.iter().enumerate() {
            let want = ((n + 1) as f64 * PI).powi(2);
            assert!((l.value - want).abs() < 1e-11 * want, "{} {}", l.value, want);
        }
    }

    #[test]
    fn oscillating_converges_between_levels() {
        let d = Density::oscillating(1.0).unwrap();
        let sl = Liouville::new(&d).unwrap();
        assert!(!sl.is_flat());
        for n in [1, 2, 7, 40] {
            let (k, err) = sl.eigen_k(Neumann, n, &SlOptions::default()).unwrap();
            let (k2, _) = sl.eigen_k(Neumann, n, &SlOptions { rel_tol: 1e-14 }).unwrap();
            assert!((k - k2).abs() < 1e-11 * k, "{n} {k} {k2} {err}");
            assert!(err < 1e-11 * k);
        }
    }
}
