//! Weak-form moments of the collision operator and the regularized flux.
//!
//! `A_δ = ∫_δ^∞ Q̃(F,F)(X) √X dX` is split as `A⁽¹⁾_δ + A⁽²⁾_δ` with
//! `A⁽¹⁾_δ = ∫_δ^∞ ∫_0^X [F(X−Y)F(Y) − F(X)(F(X−Y)+F(Y))] dY dX`,
//! `A⁽²⁾_δ = 2∫_δ^∞ ∫_X^∞ [F(X)F(Y) + F(Y−X)F(Y) − F(X)F(Y−X)] dY dX`.
//! The inner integrands are regrouped so that every term stays bounded when
//! `F ~ λ/X` at the origin.

use crate::error::{Error, Result};
use crate::profile::Profile;
use crate::quad::{self, QuadOpts};
use std::io::Write;

fn inner_breaks(x: f64, knots: &[f64]) -> Vec<f64> {
    let mut b: Vec<f64> = knots.iter().flat_map(|&k| [k, x - k, k - x]).filter(|v| *v > 0.0).collect();
    b.push(0.5 * x);
    b.push(x);
    b
}

/// Inner integral of `A⁽¹⁾` at `X`, folded onto `(0, X/2)`.
fn inner1<P: Profile + ?Sized>(f: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    let fx = f.eval(x);
    let g = |y: f64| {
        let fxy = f.eval(x - y);
        f.eval(y) * (fxy - fx) - fx * fxy
    };
    Ok(2.0 * quad::integrate(g, 0.0, 0.5 * x, &inner_breaks(x, &f.breakpoints()), opts)?)
}

/// Inner integral of `A⁽²⁾` at `X` in the variable `Z = Y − X`.
fn inner2<P: Profile + ?Sized>(f: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    let fx = f.eval(x);
    let g = |z: f64| {
        let fxz = f.eval(x + z);
        f.eval(z) * (fxz - fx) + fx * fxz
    };
    Ok(2.0 * quad::integrate_to_inf(g, 0.0, &inner_breaks(x, &f.breakpoints()), opts)?)
}

fn outer_breaks(knots: &[f64]) -> Vec<f64> {
    knots.iter().flat_map(|&k| [k, 0.5 * k, 2.0 * k]).collect()
}

/// Runs `inner` under an outer adaptive integral over `[delta, ∞)`; an inner
/// failure is reported instead of being averaged away.
fn outer<P, I>(f: &P, delta: f64, opts: &QuadOpts, inner: I) -> Result<f64>
where
    P: Profile + ?Sized,
    I: Fn(&P, f64, &QuadOpts) -> Result<f64>,
{
    let inner_opts = QuadOpts { rel: opts.rel * 0.1, abs: opts.abs * 0.1, ..*opts };
    let failure = std::sync::Mutex::new(None);
    let h = |x: f64| match inner(f, x, &inner_opts) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().expect("poisoned").get_or_insert(e);
            0.0
        }
    };
    let v = quad::integrate_to_inf(h, delta, &outer_breaks(&f.breakpoints()), opts);
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    v
}

/// `(A⁽¹⁾_δ, A⁽²⁾_δ)` for a profile of `F`.
pub fn a_delta_split<P: Profile + ?Sized>(f: &P, delta: f64, opts: &QuadOpts) -> Result<(f64, f64)> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidRange(format!("δ must be nonnegative, got {delta}")));
    }
    let a1 = outer(f, delta, opts, inner1)?;
    let a2 = outer(f, delta, opts, inner2)?;
    Ok((a1, a2))
}

/// `∫_δ^∞ Q̃(F,F) √X dX` in the weak form `A⁽¹⁾_δ + A⁽²⁾_δ`.
pub fn flux_integral<P: Profile + ?Sized>(f: &P, delta: f64, opts: &QuadOpts) -> Result<f64> {
    let (a1, a2) = a_delta_split(f, delta, opts)?;
    Ok(a1 + a2)
}

/// Flux with `δ = 0`: the outer integrand is integrable at the origin for
/// spectra with a finite `λ = lim X F(X)`, so the limit is taken directly.
pub fn flux_limit<P: Profile + ?Sized>(f: &P, opts: &QuadOpts) -> Result<f64> {
    flux_integral(f, 0.0, opts)
}

#[derive(Clone, Debug)]
pub struct FluxRow {
    pub delta: f64,
    pub a1: f64,
    pub a2: f64,
}

impl FluxRow {
    pub fn total(&self) -> f64 {
        self.a1 + self.a2
    }
}

/// Flux values on a δ ladder and their Richardson limits.
#[derive(Clone, Debug)]
pub struct FluxReport {
    pub rows: Vec<FluxRow>,
    pub a1: f64,
    pub a2: f64,
    /// observed orders of the two components (NaN when the ladder is flat)
    pub order: (f64, f64),
}

impl FluxReport {
    pub fn total(&self) -> f64 {
        self.a1 + self.a2
    }

    /// CSV `delta,a1,a2,total` plus an `extrapolated` row.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["delta", "a1", "a2", "total"])?;
        for r in &self.rows {
            w.write_record([r.delta, r.a1, r.a2, r.total()].map(|v| format!("{v:.16e}")))?;
        }
        w.write_record([
            "extrapolated".to_string(),
            format!("{:.16e}", self.a1),
            format!("{:.16e}", self.a2),
            format!("{:.16e}", self.total()),
        ])?;
        w.flush()?;
        Ok(())
    }
}

/// Richardson limit of the last three values of a geometric ladder with
/// ratio `q`; returns `(limit, observed order)`.
pub fn richardson(values: &[f64], q: f64) -> (f64, f64) {
    let n = values.len();
    if n < 2 {
        return (values.last().copied().unwrap_or(f64::NAN), f64::NAN);
    }
    if n == 2 {
        return (values[1], f64::NAN);
    }
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let d1 = a - b;
    let d2 = b - c;
    let scale = c.abs().max(1e-300);
    if d2.abs() <= 1e-12 * scale || d1 * d2 <= 0.0 {
        return (c, f64::NAN);
    }
    let p = (d1 / d2).ln() / q.ln();
    let factor = q.powf(p);
    (c - d2 / (factor - 1.0), p)
}

/// Evaluates the split on a decreasing geometric ladder of δ and extrapolates.
pub fn flux_ladder<P: Profile + ?Sized>(f: &P, deltas: &[f64], opts: &QuadOpts) -> Result<FluxReport> {
    if deltas.len() < 3 {
        return Err(Error::InvalidRange("the δ ladder needs at least three values".into()));
    }
    let q = deltas[0] / deltas[1];
    for w in deltas.windows(2) {
        if !(w[1] > 0.0 && w[1] < w[0]) || ((w[0] / w[1]) / q - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidRange("δ ladder must be positive, decreasing and geometric".into()));
        }
    }
    let mut rows = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let (a1, a2) = a_delta_split(f, d, opts)?;
        rows.push(FluxRow { delta: d, a1, a2 });
    }
    let (a1, p1) = richardson(&rows.iter().map(|r| r.a1).collect::<Vec<_>>(), q);
    let (a2, p2) = richardson(&rows.iter().map(|r| r.a2).collect::<Vec<_>>(), q);
    Ok(FluxReport { rows, a1, a2, order: (p1, p2) })
}

/// `∫_0^∞ F(X) X^p dX`.
pub fn moment<P: Profile + ?Sized>(f: &P, power: f64, opts: &QuadOpts) -> Result<f64> {
    let g = |x: f64| {
        let v = f.eval(x);
        if v == 0.0 {
            0.0
        } else {
            v * x.powf(power)
        }
    };
    quad::integrate_to_inf(g, 0.0, &f.breakpoints(), opts)
}
