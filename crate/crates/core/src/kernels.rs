//! Regularized Green's kernels on `[-a/2, a/2]`.
//!
//! Order 0 and 1 have closed forms for Neumann and periodic ends (order 0 also
//! for Dirichlet). Higher orders come from the convolution recurrence
//! `G⁽ᑫ⁺¹⁾(x, y) = ∫ G⁽⁰⁾(x, z) G⁽ᑫ⁾(z, y) dz`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::density::IntervalDomain;
use crate::error::{Error, Result};
use crate::quadrature::Quad;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    Periodic,
}

impl BoundaryCondition {
    pub fn has_zero_mode(self) -> bool {
        !matches!(self, BoundaryCondition::Dirichlet)
    }

    pub fn name(self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet => "dirichlet",
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Periodic => "periodic",
        }
    }
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dirichlet" | "dd" => Ok(BoundaryCondition::Dirichlet),
            "neumann" | "nn" => Ok(BoundaryCondition::Neumann),
            "periodic" | "pp" => Ok(BoundaryCondition::Periodic),
            _ => Err(Error::Parameter(format!("unknown boundary condition '{s}'"))),
        }
    }
}

fn checked(a: f64, x: f64, y: f64) -> Result<IntervalDomain> {
    let d = IntervalDomain::new(a)?;
    d.check(x)?;
    d.check(y)?;
    Ok(d)
}

/// Order-0 kernel in closed form.
pub fn eval_g0(bc: BoundaryCondition, a: f64, x: f64, y: f64) -> Result<f64> {
    checked(a, x, y)?;
    Ok(g0_unchecked(bc, a, x, y))
}

#[inline]
pub(crate) fn g0_unchecked(bc: BoundaryCondition, a: f64, x: f64, y: f64) -> f64 {
    match bc {
        BoundaryCondition::Neumann => -0.5 * (x - y).abs() + (x * x + y * y) / (2.0 * a) + a / 12.0,
        BoundaryCondition::Periodic => {
            let d = x - y;
            d * d / (2.0 * a) - 0.5 * d.abs() + a / 12.0
        }
        BoundaryCondition::Dirichlet => {
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            (lo + 0.5 * a) * (0.5 * a - hi) / a
        }
    }
}

/// Order-1 kernel in closed form (Neumann and periodic only).
pub fn eval_g1(bc: BoundaryCondition, a: f64, x: f64, y: f64) -> Result<f64> {
    checked(a, x, y)?;
    g1_unchecked(bc, a, x, y)
}

pub(crate) fn g1_unchecked(bc: BoundaryCondition, a: f64, x: f64, y: f64) -> Result<f64> {
    let s = if x < y { -1.0 } else { 1.0 };
    let a2 = a * a;
    let a4 = a2 * a2;
    match bc {
        BoundaryCondition::Neumann => {
            let (x2, y2) = (x * x, y * y);
            let d = x - y;
            let num = a4 - 30.0 * a2 * (x2 - 6.0 * x * y + y2) + 60.0 * a * s * d * d * d
                - 30.0 * (x2 * x2 + 6.0 * x2 * y2 + y2 * y2);
            Ok(num / (720.0 * a))
        }
        BoundaryCondition::Periodic => {
            let d = x - y;
            let d2 = d * d;
            let num = a4 - 30.0 * a2 * d2 + 60.0 * a * s * d2 * d - 30.0 * d2 * d2;
            Ok(num / (720.0 * a))
        }
        BoundaryCondition::Dirichlet => Err(Error::UnsupportedKernel {
            bc: "dirichlet",
            order: 1,
        }),
    }
}

#[derive(Debug, Clone)]
enum Repr {
    Closed,
    Spectral(usize),
    Convolved(Box<GreensKernel>),
}

/// A kernel of given order, evaluated in closed form, by truncated mode
/// series, or by quadrature of the recurrence.
#[derive(Debug, Clone)]
pub struct GreensKernel {
    bc: BoundaryCondition,
    domain: IntervalDomain,
    order: usize,
    repr: Repr,
}

impl GreensKernel {
    pub fn closed(bc: BoundaryCondition, domain: IntervalDomain, order: usize) -> Result<Self> {
        match (bc, order) {
            (_, 0) | (BoundaryCondition::Neumann | BoundaryCondition::Periodic, 1) => {
                Ok(GreensKernel {
                    bc,
                    domain,
                    order,
                    repr: Repr::Closed,
                })
            }
            _ => Err(Error::UnsupportedKernel { bc: bc.name(), order }),
        }
    }

    pub fn spectral(bc: BoundaryCondition, domain: IntervalDomain, order: usize, modes: usize) -> Self {
        GreensKernel {
            bc,
            domain,
            order,
            repr: Repr::Spectral(modes),
        }
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn domain(&self) -> IntervalDomain {
        self.domain
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.domain.check(x)?;
        self.domain.check(y)?;
        let a = self.domain.length();
        match &self.repr {
            Repr::Closed if self.order == 0 => Ok(g0_unchecked(self.bc, a, x, y)),
            Repr::Closed => g1_unchecked(self.bc, a, x, y),
            Repr::Spectral(m) => Ok(series(self.bc, a, self.order, x, y, *m)),
            Repr::Convolved(prev) => {
                let g0 = GreensKernel::closed(self.bc, self.domain, 0)?;
                convolve_at(&g0, prev, x, y)
            }
        }
    }
}

fn convolve_at(g0: &GreensKernel, prev: &GreensKernel, x: f64, y: f64) -> Result<f64> {
    let d = g0.domain;
    let failure = std::cell::RefCell::new(None);
    let r = Quad::new(1e-13).integrate(
        |z| match (g0.eval(x, z), prev.eval(z, y)) {
            (Ok(p), Ok(q)) => p * q,
            (Err(e), _) | (_, Err(e)) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        },
        d.lo(),
        d.hi(),
        &[x, y],
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.value)
}

/// Next kernel of the recurrence, evaluated by quadrature on demand.
pub fn convolve_gq(prev: &GreensKernel, g0: &GreensKernel) -> Result<GreensKernel> {
    if g0.order != 0 || g0.bc != prev.bc || g0.domain != prev.domain {
        return Err(Error::Parameter(
            "recurrence needs an order-0 kernel on the same interval".into(),
        ));
    }
    Ok(GreensKernel {
        bc: prev.bc,
        domain: prev.domain,
        order: prev.order + 1,
        repr: Repr::Convolved(Box::new(prev.clone())),
    })
}

/// Truncated mode series together with a bound on the omitted tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
}

fn series(bc: BoundaryCondition, a: f64, q: usize, x: f64, y: f64, modes: usize) -> f64 {
    let p = (q + 1) as i32;
    let mut sum = 0.0;
    // Accumulate high modes first for accuracy.
    for n in (1..=modes).rev() {
        let nf = n as f64;
        let term = match bc {
            BoundaryCondition::Neumann => {
                let k = nf * PI / a;
                (k * (x + 0.5 * a)).cos() * (k * (y + 0.5 * a)).cos() / k.powi(2 * p)
            }
            BoundaryCondition::Dirichlet => {
                let k = nf * PI / a;
                (k * (x + 0.5 * a)).sin() * (k * (y + 0.5 * a)).sin() / k.powi(2 * p)
            }
            BoundaryCondition::Periodic => {
                let k = 2.0 * nf * PI / a;
                (k * (x - y)).cos() / k.powi(2 * p)
            }
        };
        sum += term;
    }
    2.0 * sum / a
}

/// Mode-sum evaluation of the order-`q` kernel with `modes` terms.
pub fn spectral_series_oracle(
    bc: BoundaryCondition,
    a: f64,
    q: usize,
    x: f64,
    y: f64,
    modes: usize,
) -> Result<SeriesValue> {
    checked(a, x, y)?;
    let value = series(bc, a, q, x, y, modes);
    let base = match bc {
        BoundaryCondition::Periodic => 2.0 * PI / a,
        _ => PI / a,
    };
    let pow = 2 * (q + 1);
    let m = modes.max(1) as f64;
    let tail_bound = 2.0 / a * base.powi(-(pow as i32)) * m.powi(1 - pow as i32) / (pow as f64 - 1.0);
    Ok(SeriesValue { value, tail_bound })
}
