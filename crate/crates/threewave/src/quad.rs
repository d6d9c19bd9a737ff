//! Globally adaptive Gauss-Kronrod (7/15) quadrature with user breakpoints,
//! plus a logarithmic map for semi-infinite ranges.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadOpts {
    pub rel: f64,
    pub abs: f64,
    pub max_intervals: usize,
}

impl Default for QuadOpts {
    fn default() -> Self {
        QuadOpts { rel: 1e-11, abs: 1e-14, max_intervals: 4000 }
    }
}

impl QuadOpts {
    pub fn with_rel(rel: f64) -> Self {
        QuadOpts { rel, ..Default::default() }
    }
}

/// Outcome of an adaptive integration.
#[derive(Clone, Copy, Debug)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
}

impl Estimate {
    pub fn into_result(self) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::Quadrature { value: self.value, error: self.error })
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod panel: (value, error estimate, integral of |f|).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    let mut fv = [0.0; 15];
    fv[7] = fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fv[j] = f1;
        fv[14 - j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((fv[j] - mean).abs() + (fv[14 - j] - mean).abs());
    }
    let (resk, resabs, resasc) = (resk * h, resabs * h.abs(), resasc * h.abs());
    let mut err = ((resk - resg * h) * 1.0).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (1.0f64).min((200.0 * err / resasc).powf(1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    if !resk.is_finite() {
        err = f64::INFINITY;
    }
    (resk, err, resabs)
}

/// Adaptive integral of `f` over `[a, b]`, with the panel set first split at
/// every breakpoint strictly inside the range.
pub fn integrate_est<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], opts: &QuadOpts) -> Estimate {
    if a == b {
        return Estimate { value: 0.0, error: 0.0, converged: true };
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut cuts: Vec<f64> = breaks.iter().copied().filter(|&x| x > lo && x < hi && x.is_finite()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(lo);
    edges.extend(cuts);
    edges.push(hi);

    let mut heap = BinaryHeap::new();
    let mut frozen_value = 0.0;
    let mut frozen_error = 0.0;
    let mut total_abs = 0.0;
    for w in edges.windows(2) {
        let (v, e, ab) = gk15(&f, w[0], w[1]);
        total_abs += ab;
        heap.push(Piece { a: w[0], b: w[1], value: v, error: e });
    }
    let mut count = heap.len();
    // bisections that failed to reduce the error estimate
    let mut stalled = 0usize;
    loop {
        let value: f64 = frozen_value + heap.iter().map(|p| p.value).sum::<f64>();
        let error: f64 = frozen_error + heap.iter().map(|p| p.error).sum::<f64>();
        let target = opts.abs.max(opts.rel * value.abs()).max(50.0 * f64::EPSILON * total_abs);
        if error <= target || heap.is_empty() {
            let converged = error <= target && error.is_finite();
            return Estimate { value: sign * value, error, converged };
        }
        if stalled >= 10 && error <= 1e3 * target {
            // rounding noise dominates; the estimate will not improve
            return Estimate { value: sign * value, error, converged: true };
        }
        if count >= opts.max_intervals {
            return Estimate { value: sign * value, error, converged: false };
        }
        let worst = heap.pop().expect("nonempty heap");
        let mid = 0.5 * (worst.a + worst.b);
        let width = worst.b - worst.a;
        if width <= 4.0 * f64::EPSILON * worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE) || mid <= worst.a || mid >= worst.b {
            frozen_value += worst.value;
            frozen_error += worst.error;
            continue;
        }
        let (v1, e1, ab1) = gk15(&f, worst.a, mid);
        let (v2, e2, ab2) = gk15(&f, mid, worst.b);
        total_abs += ab1 + ab2;
        if e1 + e2 >= 0.99 * worst.error {
            stalled += 1;
        }
        heap.push(Piece { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Piece { a: mid, b: worst.b, value: v2, error: e2 });
        count += 1;
    }
}

pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], opts: &QuadOpts) -> Result<f64> {
    integrate_est(f, a, b, breaks, opts).into_result()
}

/// Adaptive integral of `f` over `[a, ∞)`.
///
/// Beyond the largest breakpoint `b` the variable is mapped as `Y = b e^s`, and
/// the `s` range grows until the last unit of `s` is negligible.
pub fn integrate_to_inf_est<F: Fn(f64) -> f64>(f: F, a: f64, breaks: &[f64], opts: &QuadOpts) -> Result<Estimate> {
    let mut knots: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x.is_finite()).collect();
    knots.sort_by(f64::total_cmp);
    let b = match knots.last() {
        Some(&k) => k,
        None => {
            if a > 0.0 {
                2.0 * a
            } else {
                1.0
            }
        }
    };
    let head = if b > a {
        integrate_est(&f, a, b, &knots, opts)
    } else {
        Estimate { value: 0.0, error: 0.0, converged: true }
    };
    let g = |s: f64| {
        let y = b * s.exp();
        if y.is_finite() {
            f(y) * y
        } else {
            0.0
        }
    };
    let smax = (690.0 - b.ln().max(0.0)).max(60.0);
    for &span in &[60.0, 200.0, smax] {
        let span: f64 = span.min(smax);
        let marks: Vec<f64> = (1..(span / 10.0) as usize).map(|k| 10.0 * k as f64).collect();
        let tail = integrate_est(&g, 0.0, span, &marks, opts);
        let last = integrate_est(&g, span - 5.0, span, &[], opts);
        let total = head.value + tail.value;
        let negligible = last.value.abs() <= 0.1 * opts.abs.max(opts.rel * total.abs());
        if negligible {
            return Ok(Estimate {
                value: total,
                error: head.error + tail.error + last.value.abs(),
                converged: head.converged && tail.converged,
            });
        }
        if span >= smax {
            break;
        }
    }
    Err(Error::TailDivergence(format!("integrand does not decay beyond Y = {b:.3e}")))
}

pub fn integrate_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, breaks: &[f64], opts: &QuadOpts) -> Result<f64> {
    integrate_to_inf_est(f, a, breaks, opts)?.into_result()
}
