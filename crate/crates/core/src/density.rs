//! Densities Σ and their domains.
//!
//! Every profile lives on `[-a/2, a/2]`. The annulus density is stored on its
//! conformal rectangle; only its x-profile enters the computations.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{self, Expr, Jet2};
use crate::quadrature::{Quad, QuadratureResult, TOL_1D};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalDomain {
    a: f64,
}

impl IntervalDomain {
    pub fn new(a: f64) -> Result<Self> {
        if a > 0.0 && a.is_finite() {
            Ok(IntervalDomain { a })
        } else {
            Err(Error::Parameter(format!("interval length must be positive, got {a}")))
        }
    }

    pub fn length(&self) -> f64 {
        self.a
    }

    pub fn lo(&self) -> f64 {
        -0.5 * self.a
    }

    pub fn hi(&self) -> f64 {
        0.5 * self.a
    }

    pub fn contains(&self, x: f64) -> bool {
        let slack = 4.0 * f64::EPSILON * self.a;
        x >= self.lo() - slack && x <= self.hi() + slack
    }

    pub fn check(&self, x: f64) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::OutOfDomain {
                x,
                lo: self.lo(),
                hi: self.hi(),
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectangleDomain {
    a: f64,
    b: f64,
}

impl RectangleDomain {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            Ok(RectangleDomain { a, b })
        } else {
            Err(Error::Parameter(format!("rectangle sides must be positive, got {a} x {b}")))
        }
    }

    pub fn width(&self) -> f64 {
        self.a
    }

    pub fn height(&self) -> f64 {
        self.b
    }

    pub fn area(&self) -> f64 {
        self.a * self.b
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    Interval(IntervalDomain),
    Rectangle(RectangleDomain),
}

/// Parameters of the predefined densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Uniform { length: f64 },
    Borg { alpha: f64 },
    /// `2 + sin(phase + 2π(x + 1/2)/ε)`.
    Oscillating { epsilon: f64, phase: f64 },
    Annulus { r_min: f64 },
}

#[derive(Debug, Clone)]
pub enum DensityKind {
    Uniform,
    Borg { alpha: f64 },
    Oscillating { epsilon: f64, phase: f64 },
    Annulus { r_min: f64 },
    Expression {
        text: String,
        params: BTreeMap<String, f64>,
        bound: Arc<Expr>,
    },
}

#[derive(Debug, Clone)]
pub struct Density {
    kind: DensityKind,
    domain: Domain,
}

pub fn make_builtin(spec: Builtin) -> Result<Density> {
    Density::builtin(spec)
}

impl Density {
    pub fn builtin(spec: Builtin) -> Result<Density> {
        let (kind, domain) = match spec {
            Builtin::Uniform { length } => (
                DensityKind::Uniform,
                Domain::Interval(IntervalDomain::new(length)?),
            ),
            Builtin::Borg { alpha } => {
                if !(alpha > -1.0 && alpha.is_finite()) {
                    return Err(Error::Parameter(format!("borg requires alpha > -1, got {alpha}")));
                }
                (DensityKind::Borg { alpha }, Domain::Interval(IntervalDomain::new(1.0)?))
            }
            Builtin::Oscillating { epsilon, phase } => {
                if !(epsilon > 0.0 && epsilon.is_finite()) || !phase.is_finite() {
                    return Err(Error::Parameter(format!(
                        "oscillating requires epsilon > 0, got {epsilon}"
                    )));
                }
                (
                    DensityKind::Oscillating { epsilon, phase },
                    Domain::Interval(IntervalDomain::new(1.0)?),
                )
            }
            Builtin::Annulus { r_min } => {
                if !(r_min > 0.0 && r_min < 1.0) {
                    return Err(Error::Parameter(format!(
                        "annulus requires 0 < r_min < 1, got {r_min}"
                    )));
                }
                (
                    DensityKind::Annulus { r_min },
                    Domain::Rectangle(RectangleDomain::new(-r_min.ln(), 2.0 * PI)?),
                )
            }
        };
        Ok(Density { kind, domain })
    }

    pub fn uniform(length: f64) -> Result<Density> {
        Density::builtin(Builtin::Uniform { length })
    }

    pub fn borg(alpha: f64) -> Result<Density> {
        Density::builtin(Builtin::Borg { alpha })
    }

    pub fn oscillating(epsilon: f64) -> Result<Density> {
        Density::builtin(Builtin::Oscillating { epsilon, phase: 0.0 })
    }

    pub fn annulus(r_min: f64) -> Result<Density> {
        Density::builtin(Builtin::Annulus { r_min })
    }

    /// Density given by an expression in `x` on an interval of length `a`.
    pub fn expression(text: &str, params: &BTreeMap<String, f64>, a: f64) -> Result<Density> {
        let names: Vec<&str> = params.keys().map(String::as_str).collect();
        let ast = expr::parse_with_params(text, &names)?;
        let bound = ast.bind(params)?;
        Ok(Density {
            kind: DensityKind::Expression {
                text: text.to_string(),
                params: params.clone(),
                bound: Arc::new(bound),
            },
            domain: Domain::Interval(IntervalDomain::new(a)?),
        })
    }

    pub fn kind(&self) -> &DensityKind {
        &self.kind
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// The x-interval carrying the profile.
    pub fn interval(&self) -> IntervalDomain {
        match self.domain {
            Domain::Interval(d) => d,
            Domain::Rectangle(r) => IntervalDomain { a: r.a },
        }
    }

    /// Extent in the transverse direction (1 for intervals).
    pub fn transverse(&self) -> f64 {
        match self.domain {
            Domain::Interval(_) => 1.0,
            Domain::Rectangle(r) => r.b,
        }
    }

    /// Measure of the domain.
    pub fn volume(&self) -> f64 {
        self.interval().length() * self.transverse()
    }

    pub fn name(&self) -> String {
        match &self.kind {
            DensityKind::Uniform => "uniform".into(),
            DensityKind::Borg { .. } => "borg".into(),
            DensityKind::Oscillating { .. } => "oscillating".into(),
            DensityKind::Annulus { .. } => "annulus".into(),
            DensityKind::Expression { text, .. } => format!("expression({text})"),
        }
    }

    /// Σ at `x`; expression failures give NaN.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.kind {
            DensityKind::Uniform => 1.0,
            DensityKind::Borg { alpha } => {
                let w = 1.0 + alpha * (x + 0.5);
                let w2 = w * w;
                (1.0 + alpha) * (1.0 + alpha) / (w2 * w2)
            }
            DensityKind::Oscillating { epsilon, phase } => {
                2.0 + (phase + 2.0 * PI * (x + 0.5) / epsilon).sin()
            }
            DensityKind::Annulus { r_min } => r_min * (2.0 * x).exp(),
            DensityKind::Expression { bound, .. } => {
                bound.eval(x, &BTreeMap::new()).unwrap_or(f64::NAN)
            }
        }
    }

    /// Σ at `x`, reporting expression failures.
    pub fn try_eval(&self, x: f64) -> Result<f64> {
        match &self.kind {
            DensityKind::Expression { bound, .. } => Ok(bound.eval(x, &BTreeMap::new())?),
            _ => Ok(self.eval(x)),
        }
    }

    /// Σ, Σ′ and Σ″ at `x`.
    pub fn jet(&self, x: f64) -> Jet2 {
        match &self.kind {
            DensityKind::Uniform => Jet2::constant(1.0),
            DensityKind::Borg { alpha } => {
                let w = 1.0 + alpha * (x + 0.5);
                let s = (1.0 + alpha) * (1.0 + alpha) / w.powi(4);
                Jet2 {
                    v: s,
                    d1: -4.0 * alpha * s / w,
                    d2: 20.0 * alpha * alpha * s / (w * w),
                }
            }
            DensityKind::Oscillating { epsilon, phase } => {
                let k = 2.0 * PI / epsilon;
                let arg = phase + k * (x + 0.5);
                Jet2 {
                    v: 2.0 + arg.sin(),
                    d1: k * arg.cos(),
                    d2: -k * k * arg.sin(),
                }
            }
            DensityKind::Annulus { r_min } => {
                let s = r_min * (2.0 * x).exp();
                Jet2 {
                    v: s,
                    d1: 2.0 * s,
                    d2: 4.0 * s,
                }
            }
            DensityKind::Expression { bound, .. } => bound.eval_jet(x).unwrap_or(Jet2 {
                v: f64::NAN,
                d1: f64::NAN,
                d2: f64::NAN,
            }),
        }
    }

    /// Starting panels per unit length for quadratures of oscillatory profiles.
    pub fn panel_hint(&self) -> usize {
        match &self.kind {
            DensityKind::Oscillating { epsilon, .. } => {
                ((2.0 * self.interval().length() / epsilon).ceil() as usize).clamp(1, 4096)
            }
            _ => 1,
        }
    }

    /// Quadrature settings suited to this profile. A relative floor just
    /// above roundoff keeps large integrands from chasing unreachable targets.
    pub fn quad(&self, tol: f64) -> Quad {
        Quad::new(tol).rel(5e-14).pieces(self.panel_hint())
    }

    /// Total mass ∫_Ω Σ.
    pub fn integral(&self) -> Result<QuadratureResult> {
        density_integral(self)
    }
}

/// ∫_Ω Σ, including the transverse factor on rectangles.
pub fn density_integral(d: &Density) -> Result<QuadratureResult> {
    let iv = d.interval();
    let r = d.quad(TOL_1D).integrate(|x| d.eval(x), iv.lo(), iv.hi(), &[])?;
    let b = d.transverse();
    Ok(QuadratureResult {
        value: r.value * b,
        error_estimate: r.error_estimate * b,
        panels_used: r.panels_used,
    })
}

/// Location and value of the smallest sampled density value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityReport {
    pub min_x: f64,
    pub min_value: f64,
    pub max_value: f64,
}

/// Scans 4097 grid points, then refines the smallest by golden-section search.
pub fn validate_positivity(d: &Density) -> Result<PositivityReport> {
    const N: usize = 4097;
    let iv = d.interval();
    let h = iv.length() / (N - 1) as f64;
    let mut best = (iv.lo(), f64::INFINITY);
    let mut max_value = f64::NEG_INFINITY;
    for i in 0..N {
        let x = if i + 1 == N { iv.hi() } else { iv.lo() + i as f64 * h };
        let v = d.eval(x);
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositive { x, value: v });
        }
        max_value = max_value.max(v);
        if v < best.1 {
            best = (x, v);
        }
    }

    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut lo = (best.0 - h).max(iv.lo());
    let mut hi = (best.0 + h).min(iv.hi());
    let mut c = hi - g * (hi - lo);
    let mut e = lo + g * (hi - lo);
    let (mut fc, mut fe) = (d.eval(c), d.eval(e));
    for _ in 0..80 {
        if fc < fe {
            hi = e;
            e = c;
            fe = fc;
            c = hi - g * (hi - lo);
            fc = d.eval(c);
        } else {
            lo = c;
            c = e;
            fc = fe;
            e = lo + g * (hi - lo);
            fe = d.eval(e);
        }
    }
    for (x, v) in [(c, fc), (e, fe)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::NonPositive { x, value: v });
        }
        if v < best.1 {
            best = (x, v);
        }
    }
    Ok(PositivityReport {
        min_x: best.0,
        min_value: best.1,
        max_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert!((Density::borg(1.0).unwrap().eval(0.0) - 64.0 / 81.0).abs() < 1e-15);
        assert_eq!(Density::uniform(1.0).unwrap().eval(0.2), 1.0);
        let osc = Density::builtin(Builtin::Oscillating { epsilon: 1.0, phase: 2.0 }).unwrap();
        assert!((osc.eval(-0.5) - (2.0 + 2f64.sin())).abs() < 1e-15);
    }

    #[test]
    fn parameter_ranges() {
        assert!(Density::borg(-1.0).is_err());
        assert!(Density::oscillating(0.0).is_err());
        assert!(Density::annulus(1.0).is_err());
        assert!(Density::annulus(0.0).is_err());
        assert!(Density::uniform(-2.0).is_err());
    }

    #[test]
    fn integrals() {
        let i = density_integral(&Density::borg(1.0).unwrap()).unwrap();
        assert!((i.value - 7.0 / 6.0).abs() < 1e-13);
        let i = density_integral(&Density::annulus(0.5).unwrap()).unwrap();
        assert!((i.value - PI * 0.75).abs() < 1e-12);
    }

    #[test]
    fn positivity() {
        let r = validate_positivity(&Density::oscillating(1.0).unwrap()).unwrap();
        assert!((r.min_value - 1.0).abs() < 1e-12);
        let bad = Density::expression("sin(2*pi*x)", &BTreeMap::new(), 1.0).unwrap();
        assert!(matches!(validate_positivity(&bad), Err(Error::NonPositive { .. })));
    }

    #[test]
    fn jets_agree_with_differences() {
        for d in [
            Density::borg(0.7).unwrap(),
            Density::oscillating(0.3).unwrap(),
            Density::annulus(0.2).unwrap(),
        ] {
            let x = 0.123;
            let h = 1e-4;
            let j = d.jet(x);
            let d1 = (d.eval(x + h) - d.eval(x - h)) / (2.0 * h);
            let d2 = (d.eval(x + h) - 2.0 * d.eval(x) + d.eval(x - h)) / (h * h);
            assert!((j.v - d.eval(x)).abs() < 1e-15);
            assert!((j.d1 - d1).abs() < 1e-6 * (1.0 + d1.abs()));
            assert!((j.d2 - d2).abs() < 1e-4 * (1.0 + d2.abs()));
        }
    }
}
