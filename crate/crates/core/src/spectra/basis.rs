//! Laplacian eigenbases on `[-a/2, a/2]` and matrix elements of Σ in them.
//!
//! Every mode is `norm · trig(kπx/a)` with integer `k`, so all overlaps reduce
//! to the Fourier moments `∫Σ cos(kπx/a)` and `∫Σ sin(kπx/a)`.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::density::{Density, IntervalDomain};
use crate::error::Result;
use crate::kernels::BoundaryCondition;
use crate::quadrature::Quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trig {
    Cos,
    Sin,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    pub trig: Trig,
    /// Wave number in units of π/a.
    pub k: usize,
    pub norm: f64,
    /// `(n, u)`: `u = 1` for the cosine family, `u = 2` for the sine family.
    pub label: (usize, u8),
}

/// First `size` modes of the interval Laplacian, ordered by eigenvalue.
#[derive(Debug, Clone)]
pub struct BasisTable {
    bc: BoundaryCondition,
    domain: IntervalDomain,
    modes: Vec<Mode>,
}

impl BasisTable {
    pub fn new(bc: BoundaryCondition, domain: IntervalDomain, size: usize) -> Self {
        let a = domain.length();
        let flat = 1.0 / a.sqrt();
        let wave = (2.0 / a).sqrt();
        let modes = (0..size)
            .map(|m| match bc {
                // cos(2nπx/a) for even m = 2n, sin((2n-1)πx/a) for odd m = 2n-1
                BoundaryCondition::Neumann => Mode {
                    trig: if m % 2 == 0 { Trig::Cos } else { Trig::Sin },
                    k: m,
                    norm: if m == 0 { flat } else { wave },
                    label: if m % 2 == 0 { (m / 2, 1) } else { ((m + 1) / 2, 2) },
                },
                BoundaryCondition::Periodic => {
                    let n = (m + 1) / 2;
                    Mode {
                        trig: if m == 0 || m % 2 == 1 { Trig::Cos } else { Trig::Sin },
                        k: 2 * n,
                        norm: if m == 0 { flat } else { wave },
                        label: (n, if m == 0 || m % 2 == 1 { 1 } else { 2 }),
                    }
                }
                BoundaryCondition::Dirichlet => {
                    let j = m + 1;
                    Mode {
                        trig: if j % 2 == 1 { Trig::Cos } else { Trig::Sin },
                        k: j,
                        norm: wave,
                        label: (j, if j % 2 == 1 { 1 } else { 2 }),
                    }
                }
            })
            .collect();
        BasisTable { bc, domain, modes }
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn mode(&self, m: usize) -> Mode {
        self.modes[m]
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn eigenvalue(&self, m: usize) -> f64 {
        let k = self.modes[m].k as f64 * PI / self.domain.length();
        k * k
    }

    pub fn eval(&self, m: usize, x: f64) -> f64 {
        let md = self.modes[m];
        let arg = md.k as f64 * PI * x / self.domain.length();
        md.norm
            * match md.trig {
                Trig::Cos => arg.cos(),
                Trig::Sin => arg.sin(),
            }
    }

    /// Largest wave number index in the table.
    pub fn max_k(&self) -> usize {
        self.modes.iter().map(|m| m.k).max().unwrap_or(0)
    }
}

/// Fourier moments of a density on its interval.
#[derive(Debug, Clone)]
pub struct Moments {
    cos: Vec<f64>,
    sin: Vec<f64>,
    error: f64,
}

impl Moments {
    pub fn new(d: &Density, kmax: usize) -> Result<Self> {
        let mut m = Moments {
            cos: Vec::new(),
            sin: Vec::new(),
            error: 0.0,
        };
        m.extend(d, kmax)?;
        Ok(m)
    }

    /// Adds moments up to `kmax` inclusive.
    pub fn extend(&mut self, d: &Density, kmax: usize) -> Result<()> {
        let iv = d.interval();
        let a = iv.length();
        let mass = d.integral()?.value / d.transverse();
        let tol = 5e-14 * mass.abs().max(1e-300);
        for k in self.cos.len()..=kmax {
            let w = k as f64 * PI / a;
            let q = Quad::new(tol).pieces(d.panel_hint().max(k / 2 + 1));
            let c = q.integrate(|x| d.eval(x) * (w * x).cos(), iv.lo(), iv.hi(), &[])?;
            let s = if k == 0 {
                None
            } else {
                Some(q.integrate(|x| d.eval(x) * (w * x).sin(), iv.lo(), iv.hi(), &[])?)
            };
            self.error = self.error.max(c.error_estimate);
            self.cos.push(c.value);
            match s {
                Some(s) => {
                    self.error = self.error.max(s.error_estimate);
                    self.sin.push(s.value);
                }
                None => self.sin.push(0.0),
            }
        }
        Ok(())
    }

    pub fn cos(&self, k: usize) -> f64 {
        self.cos[k]
    }

    pub fn sin(&self, k: usize) -> f64 {
        self.sin[k]
    }

    pub fn max_error(&self) -> f64 {
        self.error
    }

    pub fn len(&self) -> usize {
        self.cos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cos.is_empty()
    }

    /// ⟨p|Σ|q⟩ for two modes.
    pub fn overlap(&self, p: Mode, q: Mode) -> f64 {
        let (kp, kq) = (p.k, q.k);
        let diff = kp.abs_diff(kq);
        let sum = kp + kq;
        let v = match (p.trig, q.trig) {
            (Trig::Cos, Trig::Cos) => 0.5 * (self.cos[diff] + self.cos[sum]),
            (Trig::Sin, Trig::Sin) => 0.5 * (self.cos[diff] - self.cos[sum]),
            (Trig::Sin, Trig::Cos) => 0.5 * (self.sin[sum] + signed_sin(self, kp, kq)),
            (Trig::Cos, Trig::Sin) => 0.5 * (self.sin[sum] + signed_sin(self, kq, kp)),
        };
        p.norm * q.norm * v
    }
}

// ∫Σ sin((p-q)πx/a) with the sign of p - q.
fn signed_sin(m: &Moments, p: usize, q: usize) -> f64 {
    if p >= q {
        m.sin[p - q]
    } else {
        -m.sin[q - p]
    }
}

/// Overlaps `⟨m|Σ|n⟩` and basis eigenvalues for the first `size` modes.
#[derive(Debug, Clone)]
pub struct MatrixElementTable {
    pub bc: BoundaryCondition,
    pub size: usize,
    pub s: DMatrix<f64>,
    pub eps: Vec<f64>,
    /// Largest moment quadrature error.
    pub error: f64,
}

impl MatrixElementTable {
    pub fn build(d: &Density, bc: BoundaryCondition, size: usize) -> Result<Self> {
        let basis = BasisTable::new(bc, d.interval(), size);
        let moments = Moments::new(d, 2 * basis.max_k())?;
        Ok(Self::from_moments(&basis, &moments))
    }

    pub fn from_moments(basis: &BasisTable, moments: &Moments) -> Self {
        let n = basis.len();
        let mut s = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v = moments.overlap(basis.mode(i), basis.mode(j));
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        MatrixElementTable {
            bc: basis.bc(),
            size: n,
            s,
            eps: (0..n).map(|m| basis.eigenvalue(m)).collect(),
            error: moments.max_error(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_1d;

    #[test]
    fn orthonormal() {
        let d = IntervalDomain::new(1.3).unwrap();
        for bc in [
            BoundaryCondition::Neumann,
            BoundaryCondition::Periodic,
            BoundaryCondition::Dirichlet,
        ] {
            let b = BasisTable::new(bc, d, 9);
            for i in 0..9 {
                for j in 0..9 {
                    let r = Quad::new(1e-13)
                        .pieces(8)
                        .integrate(|x| b.eval(i, x) * b.eval(j, x), d.lo(), d.hi(), &[])
                        .unwrap();
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((r.value - want).abs() < 1e-12, "{bc} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn boundary_conditions_hold() {
        let d = IntervalDomain::new(1.0).unwrap();
        let b = BasisTable::new(BoundaryCondition::Dirichlet, d, 6);
        for m in 0..6 {
            assert!(b.eval(m, 0.5).abs() < 1e-14 && b.eval(m, -0.5).abs() < 1e-14);
        }
        let b = BasisTable::new(BoundaryCondition::Periodic, d, 7);
        for m in 0..7 {
            assert!((b.eval(m, 0.5) - b.eval(m, -0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn overlaps_match_quadrature() {
        let dens = Density::borg(0.8).unwrap();
        for bc in [
            BoundaryCondition::Neumann,
            BoundaryCondition::Periodic,
            BoundaryCondition::Dirichlet,
        ] {
            let t = MatrixElementTable::build(&dens, bc, 8).unwrap();
            let b = BasisTable::new(bc, dens.interval(), 8);
            for i in 0..8 {
                for j in 0..8 {
                    let r = integrate_1d(
                        |x| b.eval(i, x) * dens.eval(x) * b.eval(j, x),
                        -0.5,
                        0.5,
                        1e-13,
                        &[],
                    )
                    .unwrap();
                    assert!((r.value - t.s[(i, j)]).abs() < 1e-12, "{bc} {i} {j}");
                }
            }
        }
    }

    #[test]
    fn uniform_overlaps_are_identity() {
        let t = MatrixElementTable::build(&Density::uniform(1.0).unwrap(), BoundaryCondition::Neumann, 12)
            .unwrap();
        for i in 0..12 {
            for j in 0..12 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((t.s[(i, j)] - want).abs() < 1e-13);
            }
        }
    }
}
