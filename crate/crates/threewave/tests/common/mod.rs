//! Brute-force oracles shared by the integration tests.
//!
//! Double-exponential quadrature (tanh-sinh on finite pieces, exp-sinh on the
//! last half-line) with level doubling until two successive levels agree to
//! `1e-12` relative. Nothing here touches the crate's Gauss-Kronrod code.
#![allow(dead_code)]

pub mod raw;

use std::f64::consts::FRAC_PI_2;

const MAX_LEVEL: usize = 12;

fn tanh_sinh_level<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, h: f64, odd_only: bool) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut sum = if odd_only { 0.0 } else { f(c) * FRAC_PI_2 };
    let mut k = 1usize;
    loop {
        if odd_only && k % 2 == 0 {
            k += 1;
            continue;
        }
        let t = k as f64 * h;
        let s = FRAC_PI_2 * t.sinh();
        let ch = s.cosh();
        let w = FRAC_PI_2 * t.cosh() / (ch * ch);
        // distance to each end computed without cancellation
        let d = r / (s.exp() * ch);
        let (xl, xr) = (a + d, b - d);
        // each end is dropped on its own once it rounds onto the endpoint
        let (left, right) = (xl > a, xr < b);
        if w < 1e-300 || !(left || right) {
            break;
        }
        if left {
            sum += w * f(xl);
        }
        if right {
            sum += w * f(xr);
        }
        k += 1;
        if t > 7.0 {
            break;
        }
    }
    sum * r
}

/// `∫_a^b f` by tanh-sinh; endpoint singularities are fine.
pub fn tanh_sinh<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let mut h = 0.5;
    let mut total = tanh_sinh_level(&f, a, b, h, false) * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let fresh = tanh_sinh_level(&f, a, b, h, true);
        let next = 0.5 * total + fresh * h;
        let done = (next - total).abs() <= 1e-12 * next.abs().max(1e-300) || (next - total).abs() < 1e-16;
        total = next;
        if done {
            return total;
        }
    }
    total
}

fn exp_sinh_level<F: Fn(f64) -> f64>(f: &F, a: f64, scale: f64, h: f64, odd_only: bool) -> f64 {
    let mut sum = 0.0;
    let kmax = (5.0 / h) as i64;
    for k in -kmax..=kmax {
        if odd_only && k.rem_euclid(2) == 0 {
            continue;
        }
        let t = k as f64 * h;
        let u = FRAC_PI_2 * t.sinh();
        let e = u.exp();
        let x = a + scale * e;
        let w = scale * FRAC_PI_2 * t.cosh() * e;
        if !x.is_finite() || !w.is_finite() || x == a {
            continue;
        }
        let v = f(x);
        if v != 0.0 {
            sum += w * v;
        }
    }
    sum
}

/// `∫_a^∞ f` by exp-sinh; `scale` is the length over which `f` varies.
pub fn exp_sinh<F: Fn(f64) -> f64>(f: F, a: f64, scale: f64) -> f64 {
    let mut h = 0.5;
    let mut total = exp_sinh_level(&f, a, scale, h, false) * h;
    for _ in 0..MAX_LEVEL {
        h *= 0.5;
        let fresh = exp_sinh_level(&f, a, scale, h, true);
        let next = 0.5 * total + fresh * h;
        let done = (next - total).abs() <= 1e-12 * next.abs().max(1e-300) || (next - total).abs() < 1e-16;
        total = next;
        if done {
            return total;
        }
    }
    total
}

/// `∫_a^∞ f`, split at the sorted cuts inside `(a, ∞)`; the last piece is exp-sinh.
pub fn oracle_to_inf<F: Fn(f64) -> f64>(f: F, a: f64, cuts: &[f64]) -> f64 {
    let mut pts: Vec<f64> = cuts.iter().copied().filter(|&c| c > a && c.is_finite()).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-14 * y.abs().max(1.0));
    let mut acc = 0.0;
    let mut lo = a;
    for &p in &pts {
        acc += tanh_sinh(&f, lo, p);
        lo = p;
    }
    acc + exp_sinh(&f, lo, lo.max(1.0))
}

/// `∫_a^b f`, split at the cuts inside `(a, b)`.
pub fn oracle<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cuts: &[f64]) -> f64 {
    let mut pts: Vec<f64> = cuts.iter().copied().filter(|&c| c > a && c < b).collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut acc = 0.0;
    let mut lo = a;
    for &p in &pts {
        acc += tanh_sinh(&f, lo, p);
        lo = p;
    }
    acc + tanh_sinh(&f, lo, b)
}

/// C² bump `amp·(4(y−a)(b−y)/(b−a)²)³` on `(a, b)`.
pub fn bump_fn(a: f64, b: f64, amp: f64) -> impl Fn(f64) -> f64 + Sync + Copy {
    move |y: f64| {
        if y > a && y < b {
            amp * (4.0 * (y - a) * (b - y) / ((b - a) * (b - a))).powi(3)
        } else {
            0.0
        }
    }
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}
