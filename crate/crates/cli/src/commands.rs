use serde::Serialize;
use serde_json::Value;
use sumrules::spectra::{disk_annulus_spectrum, rayleigh_ritz, sl_spectrum, Method, Spectrum};
use sumrules::sum_rules::reference::{annulus_z2_asymptotic, annulus_z2_limit, reference_value};
use sumrules::sum_rules::{annulus_z2, annulus_z2_without_zero_mode, z1, z2, SumRuleResult};
use sumrules::tail::{fit_tail_1d, numeric_sum_rule, weyl_tail_2d, IndexConvention, TailModel, WeylTail};
use sumrules::{density_integral, validate_positivity, BoundaryCondition};

use crate::config::{Problem, Resolved};
use crate::fail::{Failure, EXIT_VALIDATION};
use crate::output::{fmt_e, json_text, to_value};

pub const DEFAULT_VALIDATE_TOL: f64 = 1e-6;

/// Text to write plus the exit code to leave with.
pub struct Outcome {
    pub text: String,
    pub code: i32,
}

fn with_config<T: Serialize>(report: &T, r: &Resolved) -> String {
    let mut v = to_value(report);
    if let Value::Object(o) = &mut v {
        o.insert("config".into(), to_value(r));
    }
    json_text(&v)
}

fn analytic(r: &Resolved) -> Result<SumRuleResult, Failure> {
    match r.problem {
        Problem::Disk => Err(Failure::config(
            "the full disk has no analytic pipeline; use validate for its numeric value",
        )),
        Problem::Annulus => {
            if r.order != 2 {
                return Err(Failure::config("the annulus has only the order-2 sum rule"));
            }
            Ok(annulus_z2(r.rmin[0])?)
        }
        _ => {
            let d = r.density()?;
            Ok(if r.order == 1 { z1(&d, r.bc)? } else { z2(&d, r.bc)? })
        }
    }
}

pub fn compute(r: &Resolved) -> Result<Outcome, Failure> {
    let res = analytic(r)?;
    if let Some(tol) = r.tol {
        if !(res.error_estimate <= tol) {
            return Err(Failure::numeric(format!(
                "error estimate {:e} exceeds tol {tol:e}",
                res.error_estimate
            )));
        }
    }
    Ok(Outcome {
        text: with_config(&res, r),
        code: 0,
    })
}

fn spectrum_of(r: &Resolved) -> Result<Spectrum, Failure> {
    Ok(match r.problem {
        Problem::Disk => disk_annulus_spectrum(0.0, r.count)?,
        Problem::Annulus => disk_annulus_spectrum(r.rmin[0], r.count)?,
        _ => {
            let d = r.density()?;
            if r.method == Method::RayleighRitz {
                let mut s = rayleigh_ritz(&d, r.bc, r.rr_states)?;
                s.truncate(r.count);
                s
            } else {
                sl_spectrum(&d, r.bc, r.count, r.method)?
            }
        }
    })
}

fn config_comment(r: &Resolved) -> String {
    format!("# config: {}\n", to_value(r))
}

pub fn spectrum(r: &Resolved) -> Result<Outcome, Failure> {
    let s = spectrum_of(r)?;
    let mut text = config_comment(r);
    if s.zero_mode_removed {
        text.push_str("# zero mode (E = 0) excluded\n");
    }
    text.push_str("index,eigenvalue,multiplicity,accuracy\n");
    let mut index = 1;
    for l in &s.levels {
        let acc = l.accuracy.map(fmt_e).unwrap_or_default();
        text.push_str(&format!("{index},{},{},{acc}\n", fmt_e(l.value), l.multiplicity));
        index += l.multiplicity;
    }
    Ok(Outcome { text, code: 0 })
}

#[derive(Serialize)]
#[serde(untagged)]
enum TailReport {
    Fit(TailModel),
    Weyl(WeylTail),
}

#[derive(Serialize)]
struct NumericPart {
    method: Method,
    count: usize,
    direct: f64,
    tail: f64,
    error_estimate: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    tail_model: Option<TailReport>,
}

#[derive(Serialize)]
struct ValidateReport {
    problem: String,
    bc: BoundaryCondition,
    order: u8,
    analytic: f64,
    analytic_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<f64>,
    numeric: f64,
    numeric_detail: NumericPart,
    difference: f64,
    tolerance: f64,
    pass: bool,
}

fn numeric(r: &Resolved) -> Result<NumericPart, Failure> {
    let s = spectrum_of(r)?;
    let p = r.order as u32;
    if r.is_two_d() {
        if p != 2 {
            return Err(Failure::config("the 2D order-1 sum diverges"));
        }
        let direct = s.partial_sum(2);
        let w = weyl_tail_2d(&s, 2)?;
        return Ok(NumericPart {
            method: s.method,
            count: s.count(),
            direct,
            tail: w.tail,
            // the fitted counting function is good to a few percent
            error_estimate: 0.05 * w.tail.abs(),
            tail_model: Some(TailReport::Weyl(w)),
        });
    }
    if s.method == Method::RayleighRitz {
        // variational values are too poor at the top of the basis for a tail fit
        return Ok(NumericPart {
            method: s.method,
            count: s.count(),
            direct: s.partial_sum(p as i32),
            tail: 0.0,
            error_estimate: f64::NAN,
            tail_model: None,
        });
    }
    let conv = if r.bc == BoundaryCondition::Periodic {
        IndexConvention::PerLevel
    } else {
        IndexConvention::PerIndex
    };
    let model = fit_tail_1d(&s, r.tail_terms, None, conv)?;
    let n = numeric_sum_rule(&s, &model, p)?;
    Ok(NumericPart {
        method: s.method,
        count: n.count,
        direct: n.direct,
        tail: n.tail,
        error_estimate: n.error_estimate,
        tail_model: Some(TailReport::Fit(model)),
    })
}

pub fn validate(r: &Resolved) -> Result<Outcome, Failure> {
    let (problem, value, err) = match r.problem {
        Problem::Disk => {
            if r.order != 2 {
                return Err(Failure::config("the disk has only the order-2 sum rule"));
            }
            ("disk".to_string(), annulus_z2_limit(), 0.0)
        }
        _ => {
            let a = analytic(r)?;
            (a.problem, a.value, a.error_estimate)
        }
    };
    let reference = r.builtin().and_then(|b| reference_value(&b, r.bc, r.order).ok());
    let num = numeric(r)?;
    let total = num.direct + num.tail;
    let tolerance = r.tol.unwrap_or(DEFAULT_VALIDATE_TOL);
    let difference = total - value;
    let pass = difference.abs() <= tolerance;
    let report = ValidateReport {
        problem,
        bc: r.bc,
        order: r.order,
        analytic: value,
        analytic_error: err,
        reference,
        numeric: total,
        numeric_detail: num,
        difference,
        tolerance,
        pass,
    };
    Ok(Outcome {
        text: with_config(&report, r),
        code: if pass { 0 } else { EXIT_VALIDATION },
    })
}

pub fn annulus_sweep(r: &Resolved) -> Result<Outcome, Failure> {
    if r.order != 2 {
        return Err(Failure::config("the annulus sweep is for the order-2 sum rule"));
    }
    let mut text = config_comment(r);
    text.push_str("r_min,z2_exact,z2_without_zero_mode,z2_asymptotic");
    text.push_str(if r.numeric { ",z2_numeric\n" } else { "\n" });
    for &rm in &r.rmin {
        let z = annulus_z2(rm)?;
        let mut row = format!(
            "{},{},{},{}",
            fmt_e(rm),
            fmt_e(z.value),
            fmt_e(annulus_z2_without_zero_mode(&z)),
            fmt_e(annulus_z2_asymptotic(rm))
        );
        if r.numeric {
            let s = disk_annulus_spectrum(rm, r.count)?;
            let w = weyl_tail_2d(&s, 2)?;
            row.push(',');
            row.push_str(&fmt_e(s.partial_sum(2) + w.tail));
        }
        row.push('\n');
        text.push_str(&row);
    }
    Ok(Outcome { text, code: 0 })
}

#[derive(Serialize)]
struct DensityReport {
    problem: String,
    lo: f64,
    hi: f64,
    transverse: f64,
    integral: f64,
    integral_error: f64,
    min_x: f64,
    min_value: f64,
    max_value: f64,
    positive: bool,
}

pub fn density_check(r: &Resolved) -> Result<Outcome, Failure> {
    let d = r.density()?;
    let pos = validate_positivity(&d)?;
    let q = density_integral(&d)?;
    let iv = d.interval();
    let report = DensityReport {
        problem: d.name(),
        lo: iv.lo(),
        hi: iv.hi(),
        transverse: d.transverse(),
        integral: q.value,
        integral_error: q.error_estimate,
        min_x: pos.min_x,
        min_value: pos.min_value,
        max_value: pos.max_value,
        positive: true,
    };
    Ok(Outcome {
        text: with_config(&report, r),
        code: 0,
    })
}
