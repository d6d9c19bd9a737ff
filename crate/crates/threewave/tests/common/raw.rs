//! Raw defining integrals of the operators, written against the oracles
//! above and an independent copy of the quintic cutoff.

use super::{oracle, oracle_to_inf};

pub const BUMPS: [(f64, f64, f64); 3] = [(1.0, 2.0, 1.0), (0.5, 3.0, 0.6), (0.3, 1.2, 1.5)];
pub const XS: [f64; 5] = [0.4, 1.1, 1.5, 2.5, 3.7];
pub const R: f64 = 4.0;

pub fn phi_ref(x: f64) -> f64 {
    let z = x / R;
    if z <= 0.5 {
        1.0
    } else if z >= 1.0 {
        0.0
    } else {
        let u = 2.0 * z - 1.0;
        1.0 - (10.0 * u.powi(3) - 15.0 * u.powi(4) + 6.0 * u.powi(5))
    }
}

fn chi_ref(x: f64) -> f64 {
    phi_ref(x) - 1.0
}

/// Kinks of the integrands: support ends, plateau ends and their shifts by `X`.
pub fn cuts(x: f64, a: f64, b: f64) -> Vec<f64> {
    let h = 0.5 * R;
    let mut v = vec![x, 0.5 * x, a, b, h, R];
    for s in [a, b, h, R] {
        v.push(x + s);
        v.push(x - s);
        v.push(s - x);
    }
    v.retain(|c| *c > 0.0);
    v
}

pub fn qtilde_raw(f: impl Fn(f64) -> f64 + Copy, x: f64, c: &[f64]) -> f64 {
    let fx = f(x);
    let i1 = oracle(|y| f(x - y) * f(y) - fx * (f(x - y) + f(y)), 0.0, x, c);
    let i2 = oracle_to_inf(|y| fx * f(y) + f(y - x) * f(y) - fx * f(y - x), x, c);
    (i1 + 2.0 * i2) / x.sqrt()
}

pub fn ell_raw(g: impl Fn(f64) -> f64, x: f64, c: &[f64]) -> f64 {
    let gx = g(x);
    oracle_to_inf(|y| (g(y) - gx) * (1.0 / (x - y).abs() - 1.0 / (x + y)), 0.0, c) / x.sqrt()
}

pub fn t1_raw(g: impl Fn(f64) -> f64, x: f64, c: &[f64]) -> f64 {
    let gx = g(x);
    let k = |y: f64| {
        let u = (x - y).abs();
        (g(y) - gx) * (chi_ref(u) / u - chi_ref(x + y) / (x + y))
    };
    oracle_to_inf(k, 0.0, c) / x.sqrt()
}

/// Second correction over `(X/2, ∞)`, the range of the symmetrized collision integral.
pub fn t2_raw(g: impl Fn(f64) -> f64, x: f64, c: &[f64]) -> f64 {
    let px = phi_ref(x);
    let k = |y: f64| {
        let u = (x - y).abs();
        let s = if x > y { 1.0 } else { -1.0 };
        s * g(y) / y * (phi_ref(u) - px) + (phi_ref(y) - px) * g(u) / u
    };
    oracle_to_inf(k, 0.5 * x, c) / x.sqrt()
}
