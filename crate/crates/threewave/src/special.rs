//! Complex digamma, log-gamma and cotangent.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Distance below which `z` counts as a nonpositive integer.
const POLE_EPS: f64 = 1e-14;

fn near_nonpositive_integer(z: Complex64) -> bool {
    z.re <= 0.5 && z.im.abs() < POLE_EPS && (z.re - z.re.round()).abs() < POLE_EPS
}

/// `ψ(z)` by upward recurrence to `Re z ≥ 8` and the asymptotic series;
/// reflection for `Re z < 1/2`.
pub fn digamma(z: Complex64) -> Result<Complex64> {
    if near_nonpositive_integer(z) {
        return Err(Error::Pole(format!("digamma at {z}")));
    }
    if z.re < 0.5 {
        // ψ(z) = ψ(1−z) − π cot(πz)
        return Ok(digamma(Complex64::new(1.0, 0.0) - z)? - PI * cot(PI * z));
    }
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.re < 8.0 {
        acc -= w.inv();
        w += 1.0;
    }
    let w2 = (w * w).inv();
    // Bernoulli terms B_{2k}/(2k)
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32760.0,
        1.0 / 12.0,
    ];
    let mut series = Complex64::new(0.0, 0.0);
    for c in C.iter().rev() {
        series = (series + *c) * w2;
    }
    Ok(acc + w.ln() - 0.5 * w.inv() - series)
}

/// Principal `ln Γ(z)`-compatible logarithm (continuous off the negative axis).
pub fn ln_gamma(z: Complex64) -> Result<Complex64> {
    if near_nonpositive_integer(z) {
        return Err(Error::Pole(format!("gamma at {z}")));
    }
    if z.re < 0.5 {
        // Γ(z)Γ(1−z) = π / sin(πz)
        let s = (PI * z).sin();
        return Ok(Complex64::new(PI.ln(), 0.0) - s.ln() - ln_gamma(Complex64::new(1.0, 0.0) - z)?);
    }
    let mut w = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while w.re < 10.0 {
        acc -= w.ln();
        w += 1.0;
    }
    let wi = w.inv();
    let w2 = wi * wi;
    // B_{2k}/(2k(2k−1))
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360360.0,
        1.0 / 156.0,
    ];
    let mut series = Complex64::new(0.0, 0.0);
    for c in C.iter().rev() {
        series = series * w2 + *c;
    }
    let half_ln_2pi = 0.5 * (2.0 * PI).ln();
    Ok(acc + (w - 0.5) * w.ln() - w + half_ln_2pi + series * wi)
}

pub fn gamma(z: Complex64) -> Result<Complex64> {
    Ok(ln_gamma(z)?.exp())
}

/// `cot(w)`, stable for large `|Im w|`.
pub fn cot(w: Complex64) -> Complex64 {
    let (x, y) = (w.re, w.im);
    if y.abs() > 20.0 {
        // cot(x+iy) = (sin 2x − i sinh 2y)/(cosh 2y − cos 2x)
        let e = (-2.0 * y.abs()).exp();
        let denom = 1.0 - 2.0 * (2.0 * x).cos() * e + e * e;
        let re = 2.0 * (2.0 * x).sin() * e / denom;
        let im = -y.signum() * (1.0 - e * e) / denom;
        return Complex64::new(re, im);
    }
    let s2x = (2.0 * x).sin();
    let sh = (2.0 * y).sinh();
    // cosh 2y − cos 2x without cancellation
    let denom = 2.0 * (y.sinh().powi(2) + x.sin().powi(2));
    Complex64::new(s2x / denom, -sh / denom)
}

/// Harmonic number `H(x) = ψ(x+1) + γ` for real `x > −1`.
pub fn harmonic(x: f64) -> Result<f64> {
    Ok(digamma(Complex64::new(x + 1.0, 0.0))?.re + EULER_GAMMA)
}
