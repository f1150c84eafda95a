//! Asymptotic fits to finite spectra and summation of the missing tail.
//!
//! One-dimensional spectra follow `E_n ≈ c₁n² + c₂ + Σ_p c_{p+2} n^{−2p}`.
//! Periodic spectra come in near-degenerate pairs, so each member of the pair
//! is fitted as its own series in the level index. Two-dimensional spectra use
//! a smooth counting function `N(E) ≈ w₁E + w₂√E + w₃`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::Spectrum;

/// `Σ_{m>n} m^{-s}` by Euler–Maclaurin at `x = n`; needs `s > 1`, `n ≥ 8`.
pub fn power_tail(s: f64, n: usize) -> f64 {
    // B_{2i}/(2i)!
    const B: [f64; 6] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30240.0,
        -1.0 / 1209600.0,
        1.0 / 47900160.0,
        -691.0 / 1307674368000.0,
    ];
    let x = n as f64;
    let f = x.powf(-s);
    let mut sum = x * f / (s - 1.0) - 0.5 * f;
    // f^{(r)}(x) = (-1)^r s(s+1)…(s+r-1) x^{-s-r}
    let mut rising = s;
    let mut deriv = -s * f / x;
    for (i, b) in B.iter().enumerate() {
        sum -= b * deriv;
        let r = 2 * i + 1;
        rising *= (s + r as f64) * (s + r as f64 + 1.0);
        deriv = -rising * f / x.powi(r as i32 + 2);
    }
    sum
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexConvention {
    /// Model index is the position in the sorted spectrum.
    PerIndex,
    /// Sorted positions `2j−1` and `2j` form level `j`; each member gets its own fit.
    PerLevel,
}

/// One fitted series `E_n ≈ c₁n² + c₂ + c₃n⁻² + …`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailFit {
    pub coefficients: Vec<f64>,
    /// Inclusive model-index window used for the fit.
    pub window: (usize, usize),
    pub rms_residual: f64,
}

impl TailFit {
    pub fn eval(&self, n: f64) -> f64 {
        let u = 1.0 / (n * n);
        let mut v = 0.0;
        for &c in self.coefficients[1..].iter().rev() {
            v = v * u + c;
        }
        self.coefficients[0] * n * n + v
    }

    /// `Σ_{n>from} model(n)^{−p}`.
    pub fn tail_sum(&self, p: u32, from: usize) -> Result<f64> {
        let c1 = self.coefficients[0];
        if !(c1 > 0.0) {
            return Err(Error::Fit(format!("leading coefficient {c1} is not positive")));
        }
        let pi = p as i32;
        const DIRECT: usize = 100;
        let mut direct = 0.0;
        for n in (from + 1..=from + DIRECT).rev() {
            let m = self.eval(n as f64);
            if !(m > 0.0) {
                return Err(Error::Fit(format!("model is not positive at n = {n}")));
            }
            direct += m.powi(-pi);
        }
        // (1 + Σ a_i u^i)^{−p} with u = n⁻², then term-wise zeta tails
        let start = from + DIRECT;
        const TERMS: usize = 12;
        let a: Vec<f64> = (0..TERMS)
            .map(|i| self.coefficients.get(i).map_or(0.0, |c| c / c1))
            .collect();
        let alpha = -(p as f64);
        let mut b = vec![1.0];
        for m in 1..TERMS {
            let mut s = 0.0;
            for i in 1..=m {
                s += ((alpha + 1.0) * i as f64 - m as f64) * a[i] * b[m - i];
            }
            b.push(s / m as f64);
        }
        let mut rest = 0.0;
        for (m, bm) in b.iter().enumerate().rev() {
            rest += bm * power_tail((2 * pi + 2 * m as i32) as f64, start);
        }
        Ok(direct + rest * c1.powi(-pi))
    }
}

/// Fits for one spectrum under an index convention.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailModel {
    pub convention: IndexConvention,
    pub branches: Vec<TailFit>,
}

impl TailModel {
    /// `Σ` of `model^{−p}` over sorted positions beyond `from`.
    pub fn tail_sum(&self, p: u32, from: usize) -> Result<f64> {
        match self.convention {
            IndexConvention::PerIndex => self.branches[0].tail_sum(p, from),
            IndexConvention::PerLevel => {
                Ok(self.branches[0].tail_sum(p, from.div_ceil(2))? + self.branches[1].tail_sum(p, from / 2)?)
            }
        }
    }
}

fn fit_series(values: &[f64], inverse_powers: usize, window: (usize, usize)) -> Result<TailFit> {
    let (lo, hi) = window;
    let ncoef = inverse_powers + 2;
    if lo < 1 || hi > values.len() || hi < lo || hi - lo + 1 < ncoef + 2 {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] cannot support {ncoef} coefficients over {} values",
            values.len()
        )));
    }
    let rows = hi - lo + 1;
    let scale = hi as f64;
    // column j holds (n/scale)^{2−2j}
    let design = DMatrix::from_fn(rows, ncoef, |i, j| {
        let t = (lo + i) as f64 / scale;
        t.powi(2 - 2 * j as i32)
    });
    let rhs = DVector::from_fn(rows, |i, _| values[lo + i - 1]);
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if !(smin > 1e-15 * smax) {
        return Err(Error::Fit("rank-deficient design matrix".into()));
    }
    let mut sol = svd.solve(&rhs, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    // refine against the residual; the columns are nearly collinear on short windows
    for _ in 0..3 {
        let r = &rhs - &design * &sol;
        sol += svd.solve(&r, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    }
    let resid = &design * &sol - &rhs;
    let rms = (resid.norm_squared() / rows as f64).sqrt();
    let coefficients = (0..ncoef)
        .map(|j| sol[j] * scale.powi(2 * j as i32 - 2))
        .collect();
    Ok(TailFit {
        coefficients,
        window,
        rms_residual: rms,
    })
}

/// Least-squares fit of the asymptotic model with `inverse_powers` terms
/// `n⁻², …`. `window` is in sorted positions (1-based, inclusive); `None`
/// takes the last 5% (at least enough points for the fit).
pub fn fit_tail_1d(
    s: &Spectrum,
    inverse_powers: usize,
    window: Option<(usize, usize)>,
    convention: IndexConvention,
) -> Result<TailModel> {
    let values = s.values();
    let n = values.len();
    let need = inverse_powers + 4;
    let (lo, hi) = window.unwrap_or_else(|| {
        let per = if convention == IndexConvention::PerLevel { 2 } else { 1 };
        let span = (n / 20).max(need * per);
        (n.saturating_sub(span) + 1, n)
    });
    match convention {
        IndexConvention::PerIndex => Ok(TailModel {
            convention,
            branches: vec![fit_series(&values, inverse_powers, (lo, hi))?],
        }),
        IndexConvention::PerLevel => {
            let lower: Vec<f64> = values.iter().step_by(2).copied().collect();
            let upper: Vec<f64> = values.iter().skip(1).step_by(2).copied().collect();
            let b0 = fit_series(&lower, inverse_powers, (lo.div_ceil(2).max(1), hi.div_ceil(2)))?;
            let b1 = fit_series(&upper, inverse_powers, ((lo / 2).max(1), hi / 2))?;
            Ok(TailModel {
                convention,
                branches: vec![b0, b1],
            })
        }
    }
}

/// Direct partial sum plus tail, itemized.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericSumRule {
    pub order: u32,
    pub count: usize,
    pub direct: f64,
    pub tail: f64,
    pub value: f64,
    pub error_estimate: f64,
}

fn direct_sum(s: &Spectrum, p: u32) -> (f64, f64) {
    let mut sum = 0.0;
    let mut err = 0.0;
    for l in s.levels.iter().rev() {
        let m = l.multiplicity as f64;
        sum += m * l.value.powi(-(p as i32));
        if let Some(a) = l.accuracy {
            err += m * p as f64 * a * l.value.powi(-(p as i32) - 1);
        }
    }
    (sum, err)
}

/// `Σ 1/Eᵖ` from a 1D spectrum and its fitted tail.
pub fn numeric_sum_rule(s: &Spectrum, model: &TailModel, p: u32) -> Result<NumericSumRule> {
    let (direct, direct_err) = direct_sum(s, p);
    let count = s.count();
    let tail = model.tail_sum(p, count)?;
    // model uncertainty: the same tail with the last inverse power dropped
    let mut reduced = model.clone();
    for b in reduced.branches.iter_mut() {
        if b.coefficients.len() > 2 {
            b.coefficients.pop();
        }
    }
    let spread = (reduced.tail_sum(p, count)? - tail).abs();
    let resid: f64 = model
        .branches
        .iter()
        .map(|b| {
            let c1 = b.coefficients[0];
            let nb = b.window.1 as f64;
            b.rms_residual * p as f64 / (c1.powi(p as i32 + 1) * (2 * p + 1) as f64 * nb.powi(2 * p as i32 + 1))
        })
        .sum();
    let value = direct + tail;
    Ok(NumericSumRule {
        order: p,
        count,
        direct,
        tail,
        value,
        error_estimate: direct_err + spread + resid + 4.0 * f64::EPSILON * value,
    })
}

/// Smooth counting function `N(E) ≈ w₁E + w₂√E + w₃` and the tail it implies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylTail {
    pub w: [f64; 3],
    pub cutoff: f64,
    pub tail: f64,
}

/// Fits the counting function on the spectrum (staircase midpoints) and
/// returns `Σ_{E>cutoff} E^{−p}` for the eigenvalues not in `s`, with the
/// cutoff at the largest computed eigenvalue.
pub fn weyl_tail_2d(s: &Spectrum, p: u32) -> Result<WeylTail> {
    let values = s.values();
    let n = values.len();
    if n < 8 {
        return Err(Error::Fit("too few eigenvalues for a counting-function fit".into()));
    }
    if p < 2 {
        return Err(Error::Fit("the two-dimensional tail diverges for p < 2".into()));
    }
    let lo = n / 4;
    let rows = n - lo;
    let cutoff = values[n - 1];
    let design = DMatrix::from_fn(rows, 3, |i, j| {
        let e = values[lo + i] / cutoff;
        match j {
            0 => e,
            1 => e.sqrt(),
            _ => 1.0,
        }
    });
    let rhs = DVector::from_fn(rows, |i, _| (lo + i) as f64 + 0.5);
    let sol = design
        .svd(true, true)
        .solve(&rhs, 0.0)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let w = [sol[0] / cutoff, sol[1] / cutoff.sqrt(), sol[2]];
    let pf = p as f64;
    let lam = cutoff;
    let tail = -(n as f64) * lam.powf(-pf)
        + pf * (w[0] * lam.powf(1.0 - pf) / (pf - 1.0)
            + w[1] * lam.powf(0.5 - pf) / (pf - 0.5)
            + w[2] * lam.powf(-pf) / pf);
    Ok(WeylTail { w, cutoff, tail })
}
