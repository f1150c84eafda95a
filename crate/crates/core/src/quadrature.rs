//! Adaptive Gauss–Kronrod (7/15) integration in one and two dimensions.
//!
//! Panels are bisected worst-first until the summed error estimate meets the
//! tolerance. The final value is summed in left-to-right panel order, so the
//! result depends only on the inputs.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels_used: usize,
}

/// Default absolute tolerances.
pub const TOL_1D: f64 = 1e-12;
pub const TOL_2D: f64 = 1e-10;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

// Heap ordering: largest error first, ties broken by position for determinism.
impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// One 15-point Kronrod panel with the QUADPACK error heuristic.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resg = fc * WG[3];
    let mut resk = fc * WGK[7];
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    if !result.is_finite() {
        err = f64::INFINITY;
    }
    (result, err)
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy)]
pub struct Quad {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
    /// Equal pieces each split segment starts with.
    pub initial_pieces: usize,
}

impl Quad {
    pub fn new(abs_tol: f64) -> Self {
        Quad {
            abs_tol,
            rel_tol: 0.0,
            max_panels: 20_000,
            initial_pieces: 1,
        }
    }

    pub fn rel(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn pieces(mut self, n: usize) -> Self {
        self.initial_pieces = n.max(1);
        self
    }

    pub fn max_panels(mut self, n: usize) -> Self {
        self.max_panels = n;
        self
    }

    /// Integrates `f` over `[a, b]`, starting with panel boundaries at every
    /// split point that falls strictly inside the interval.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
        splits: &[f64],
    ) -> Result<QuadratureResult> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::Parameter(format!("integration limits [{a}, {b}]")));
        }
        if a == b {
            return Ok(QuadratureResult {
                value: 0.0,
                error_estimate: 0.0,
                panels_used: 0,
            });
        }
        let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

        let mut edges = vec![lo];
        let mut inner: Vec<f64> = splits
            .iter()
            .copied()
            .filter(|s| *s > lo && *s < hi)
            .collect();
        inner.sort_by(f64::total_cmp);
        inner.dedup();
        edges.extend(inner);
        edges.push(hi);

        let mut heap = BinaryHeap::new();
        for w in edges.windows(2) {
            let n = self.initial_pieces;
            for i in 0..n {
                let pa = w[0] + (w[1] - w[0]) * i as f64 / n as f64;
                let pb = if i + 1 == n {
                    w[1]
                } else {
                    w[0] + (w[1] - w[0]) * (i + 1) as f64 / n as f64
                };
                let (value, error) = gk15(&f, pa, pb);
                heap.push(Panel {
                    a: pa,
                    b: pb,
                    value,
                    error,
                });
            }
        }

        let mut frozen: Vec<Panel> = Vec::new();
        let (mut total, mut err) = totals(heap.iter());
        let mut steps = 0usize;
        loop {
            // Refresh the running sums now and then to shed drift.
            steps += 1;
            if steps % 64 == 0 {
                (total, err) = totals(heap.iter().chain(frozen.iter()));
            }
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= target {
                let (t, e) = totals(heap.iter().chain(frozen.iter()));
                if e <= self.abs_tol.max(self.rel_tol * t.abs()) {
                    return Ok(finish(heap, frozen, sign));
                }
                (total, err) = (t, e);
                continue;
            }
            if total.is_nan() || (!err.is_finite() && heap.iter().all(|p| p.error.is_finite())) {
                break;
            }
            if heap.len() + frozen.len() >= self.max_panels {
                break;
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-13 * (hi - lo) {
                frozen.push(worst);
                if heap.is_empty() {
                    break;
                }
                continue;
            }
            let (v1, e1) = gk15(&f, worst.a, mid);
            let (v2, e2) = gk15(&f, mid, worst.b);
            total += v1 + v2 - worst.value;
            err += e1 + e2 - worst.error;
            if !err.is_finite() || !worst.error.is_finite() {
                (total, err) = totals(heap.iter().chain(frozen.iter()).chain([
                    &Panel { a: worst.a, b: mid, value: v1, error: e1 },
                    &Panel { a: mid, b: worst.b, value: v2, error: e2 },
                ]));
            }
            heap.push(Panel {
                a: worst.a,
                b: mid,
                value: v1,
                error: e1,
            });
            heap.push(Panel {
                a: mid,
                b: worst.b,
                value: v2,
                error: e2,
            });
        }

        let best = finish(heap, frozen, sign);
        Err(Error::Accuracy {
            value: best.value,
            error: best.error_estimate,
            tol: self.abs_tol,
        })
    }
}

fn totals<'a, I: Iterator<Item = &'a Panel>>(panels: I) -> (f64, f64) {
    let mut v = 0.0;
    let mut e = 0.0;
    for p in panels {
        v += p.value;
        e += p.error;
    }
    (v, e)
}

fn finish(heap: BinaryHeap<Panel>, frozen: Vec<Panel>, sign: f64) -> QuadratureResult {
    let mut panels: Vec<Panel> = heap.into_vec();
    panels.extend(frozen);
    panels.sort_by(|p, q| p.a.total_cmp(&q.a));
    let value = neumaier_sum(panels.iter().map(|p| p.value));
    let error = panels.iter().map(|p| p.error).sum();
    QuadratureResult {
        value: sign * value,
        error_estimate: error,
        panels_used: panels.len(),
    }
}

/// Compensated summation.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for t in terms {
        let s = sum + t;
        if sum.abs() >= t.abs() {
            comp += (sum - s) + t;
        } else {
            comp += (t - s) + sum;
        }
        sum = s;
    }
    sum + comp
}

/// Integrates `f` over `[a, b]` to absolute tolerance `tol`.
pub fn integrate_1d<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
    splits: &[f64],
) -> Result<QuadratureResult> {
    Quad::new(tol).integrate(f, a, b, splits)
}

/// Axis-aligned integration rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        Rect { x0, x1, y0, y1 }
    }

    pub fn square(lo: f64, hi: f64) -> Self {
        Rect::new(lo, hi, lo, hi)
    }
}

/// Nested adaptive integration of `f(x, y)` over `rect`.
///
/// With `split_diagonal` the inner `y` integral breaks at `y = x`, which keeps
/// kernels with a kink on the diagonal at full Gauss order.
pub fn integrate_2d<F: Fn(f64, f64) -> f64>(
    f: F,
    rect: Rect,
    tol: f64,
    split_diagonal: bool,
) -> Result<QuadratureResult> {
    let width = (rect.x1 - rect.x0).abs().max(f64::MIN_POSITIVE);
    let inner_quad = Quad::new(0.1 * tol / width).rel(5e-14);
    let inner_err = RefCell::new(0.0_f64);
    let failure: RefCell<Option<Error>> = RefCell::new(None);

    let outer = Quad::new(0.5 * tol).rel(5e-14).integrate(
        |x| {
            let splits = if split_diagonal { vec![x] } else { Vec::new() };
            match inner_quad.integrate(|y| f(x, y), rect.y0, rect.y1, &splits) {
                Ok(r) => {
                    let mut e = inner_err.borrow_mut();
                    *e = e.max(r.error_estimate);
                    r.value
                }
                Err(err) => {
                    failure.borrow_mut().get_or_insert(err);
                    f64::NAN
                }
            }
        },
        rect.x0,
        rect.x1,
        &[],
    );
    if let Some(err) = failure.into_inner() {
        return Err(err);
    }
    let outer = outer?;
    Ok(QuadratureResult {
        value: outer.value,
        error_estimate: outer.error_estimate + inner_err.into_inner() * width,
        panels_used: outer.panels_used,
    })
}

/// Ten-point Gauss–Legendre nodes and weights on [-1, 1], positive half.
pub const GL10: [(f64, f64); 5] = [
    (0.148_874_338_981_631_2, 0.295_524_224_714_752_9),
    (0.433_395_394_129_247_2, 0.269_266_719_309_996_4),
    (0.679_409_568_299_024_4, 0.219_086_362_515_982_0),
    (0.865_063_366_688_984_5, 0.149_451_349_150_580_6),
    (0.973_906_528_517_171_7, 0.066_671_344_308_688_1),
];

/// Nodes and weights of the ten-point rule on `[lo, hi]`.
pub fn gl_nodes(lo: f64, hi: f64) -> impl Iterator<Item = (f64, f64)> {
    let (c, h) = (0.5 * (lo + hi), 0.5 * (hi - lo));
    GL10.iter()
        .flat_map(move |&(t, w)| [(c - h * t, h * w), (c + h * t, h * w)])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact_in_one_panel() {
        let (v, _) = gk15(&|x: f64| x.powi(15) + 3.0 * x.powi(8), 0.0, 1.0);
        assert!((v - (1.0 / 16.0 + 3.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn simple_integrals() {
        let r = integrate_1d(|x| x * x, 0.0, 1.0, 1e-12, &[]).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() < 1e-14);
        let r = integrate_1d(|x| 1.0 / 12.0 + x * x, -0.5, 0.5, 1e-12, &[]).unwrap();
        assert!((r.value - 1.0 / 6.0).abs() < 1e-14);
        let r = integrate_1d(
            |x| 2.0 - (2.0 * std::f64::consts::PI * x + 2.0).sin(),
            -0.5,
            0.5,
            1e-12,
            &[],
        )
        .unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate_1d(|x| x.exp(), 1.0, 0.0, 1e-12, &[]).unwrap();
        assert!((r.value + (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn kink_is_handled_with_split() {
        let r = integrate_1d(|x: f64| (x - 0.3).abs(), 0.0, 1.0, 1e-13, &[0.3]).unwrap();
        assert!((r.value - (0.045 + 0.245)).abs() < 1e-14);
        assert!(r.panels_used <= 2);
    }

    #[test]
    fn unreachable_tolerance_reports_accuracy_error() {
        let q = Quad::new(1e-14).max_panels(8);
        let err = q.integrate(|x: f64| x.sqrt().recip(), 0.0, 1.0, &[]).unwrap_err();
        assert!(matches!(err, Error::Accuracy { .. }));
    }

    #[test]
    fn unit_square() {
        let r = integrate_2d(|_, _| 1.0, Rect::square(0.0, 1.0), 1e-10, false).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }
}
