//! Pointwise evaluation of the collision operator `Q̃`, its normalized form
//! `Q_N(h) = X·Q̃(h/X)`, the cutoff source `Q_N(φ)` and the quantum variant `Q̃_q`.
//!
//! All integrals are computed adaptively on profiles. Grid data enter through
//! [`GridFunction::v_profile`] / [`GridFunction::f_profile`], which attach the
//! interpolant and the closures at both ends.

use crate::error::{Error, Result};
use crate::grid::{CutoffProfile, Grid, GridFunction};
use crate::profile::{Profile, TimesX};
use crate::quad::{self, QuadOpts};
use serde::{Deserialize, Serialize};

/// Power-law continuation `F(Y) ≈ c·Y^{-1-q}` (so `V ≈ c·Y^{-q}`) beyond `X_max`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub amplitude: f64,
    pub exponent: f64,
}

impl TailModel {
    /// `q = 0` is admitted: it continues a Rayleigh-Jeans spectrum, for which
    /// every collision integral still converges.
    pub fn new(amplitude: f64, exponent: f64) -> Result<Self> {
        if !amplitude.is_finite() || !(exponent >= 0.0) || !exponent.is_finite() {
            return Err(Error::TailDivergence(format!("tail exponent must be finite and ≥ 0, got {exponent}")));
        }
        Ok(TailModel { amplitude, exponent })
    }

    /// Zero continuation.
    pub fn none() -> Self {
        TailModel { amplitude: 0.0, exponent: 1.0 }
    }

    /// Continuous continuation of `V` through `(x_max, v_max)`.
    pub fn matched(v_max: f64, x_max: f64, exponent: f64) -> Result<Self> {
        TailModel::new(v_max * x_max.powf(exponent), exponent)
    }

    /// Tail of `∫ F(Y) Y^p dY` beyond `x`.
    pub fn moment_tail(&self, x: f64, p: f64) -> Result<f64> {
        if self.amplitude == 0.0 {
            return Ok(0.0);
        }
        let e = p - self.exponent;
        if e >= 0.0 {
            return Err(Error::TailDivergence(format!("moment of order {p} with tail exponent {}", self.exponent)));
        }
        Ok(-self.amplitude * x.powf(e) / e)
    }
}

/// Evaluates `f` at every node, in parallel when the feature is on; results
/// keep node order.
#[cfg(feature = "parallel")]
pub fn map_nodes<T, F>(nodes: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    nodes.par_iter().map(|&x| f(x)).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_nodes<T, F>(nodes: &[f64], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(f64) -> Result<T> + Sync + Send,
{
    nodes.iter().map(|&x| f(x)).collect()
}

/// Breakpoints of `Y ↦ p(|X − Y|)` and `Y ↦ p(Y)` for profile knots `b`.
pub(crate) fn shifted_breaks(x: f64, knots: &[f64], extra: &[f64]) -> Vec<f64> {
    let mut out = vec![x];
    for &b in knots {
        out.push(b);
        out.push(x + b);
        out.push(x - b);
    }
    out.extend_from_slice(extra);
    out.retain(|v| v.is_finite() && *v > 0.0);
    out
}

/// `Q̃(F,F)(X)` from the `V = X·F` profile, symmetrized form on `(X/2, ∞)`.
///
/// With `u = |X−Y|`, `s = sign(Y−X)` the integrand is
/// `V(u)(V(Y)−V(X))/(uY) + s V(X)(V(Y)−V(u))/(XY)`, which is identically zero
/// when `V` is constant.
pub fn qtilde_v<P: Profile + ?Sized>(v: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidRange(format!("X must be positive, got {x}")));
    }
    let vx = v.eval(x);
    let integrand = |y: f64| {
        let u = (x - y).abs();
        if u == 0.0 {
            return 0.0;
        }
        let vu = v.eval(u);
        let vy = v.eval(y);
        let s = if y > x { 1.0 } else { -1.0 };
        vu * (vy - vx) / (u * y) + s * vx * (vy - vu) / (x * y)
    };
    let breaks = shifted_breaks(x, &v.breakpoints(), &[]);
    let i = quad::integrate_to_inf(integrand, 0.5 * x, &breaks, opts)?;
    Ok(2.0 * i / x.sqrt())
}

/// `Q̃(F,F)(X)` for a profile of `F`.
pub fn qtilde<P: Profile + ?Sized>(f: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    qtilde_v(&TimesX(f), x, opts)
}

/// `Q̃(F,F)` at every node of a sampled `F`.
pub fn qtilde_grid(f: &GridFunction, tail: &TailModel, opts: &QuadOpts) -> Result<Vec<f64>> {
    let p = f.f_profile(tail);
    map_nodes(f.nodes(), |x| qtilde(&p, x, opts))
}

/// Quantum variant
/// `X^{-1/2}∫_0^X (F(X−Y)F(Y) − F(X)[1+F(X−Y)+F(Y)]) + 2X^{-1/2}∫_X^∞ (F(Y)[1+F(Y−X)+F(X)] − F(Y−X)F(X))`.
pub fn qtilde_q<P: Profile + ?Sized>(f: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidRange(format!("X must be positive, got {x}")));
    }
    let fx = f.eval(x);
    let knots = f.breakpoints();
    // first integral folded onto (0, X/2) by the symmetry Y ↔ X−Y
    let inner = |y: f64| {
        let fy = f.eval(y);
        let fxy = f.eval(x - y);
        fy * (fxy - fx) - fx * fxy
    };
    let b1 = shifted_breaks(x, &knots, &[]);
    let i1 = 2.0 * quad::integrate(inner, 0.0, 0.5 * x, &b1, opts)? - x * fx;
    let outer = |z: f64| {
        let fz = f.eval(z);
        let fxz = f.eval(x + z);
        fz * (fxz - fx) + fxz * (1.0 + fx)
    };
    let mut b2: Vec<f64> = knots.iter().flat_map(|&b| [b, b - x]).filter(|v| *v > 0.0).collect();
    b2.push(x);
    let i2 = quad::integrate_to_inf(outer, 0.0, &b2, opts)?;
    Ok((i1 + 2.0 * i2) / x.sqrt())
}

/// Effective power of `|g|` at the origin, probed two decades apart below `x`.
fn origin_power<P: Profile + ?Sized>(g: &P, x: f64) -> f64 {
    let a = g.eval(1e-14 * x).abs();
    let b = g.eval(1e-12 * x).abs();
    if a == 0.0 || b == 0.0 {
        return 1.0;
    }
    (b / a).ln() / 100f64.ln()
}

/// `Q_N(g)(X) = X·Q̃(g/·)(X)` by the four-term expansion
/// `2√X [∫_0^{X/2} F(Y)(F(X−Y)−F(X)) − F(X)∫_{X/2}^X F + ∫_0^∞ F(Z)(F(X+Z)−F(X)) + F(X)∫_X^∞ F]`
/// with `F = g/Y`.
pub fn q_n<P: Profile + ?Sized>(g: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidRange(format!("X must be positive, got {x}")));
    }
    let r = origin_power(g, x);
    if r < -0.01 {
        return Err(Error::OriginDivergence(format!("|g| grows like Y^{r:.3} at 0")));
    }
    let f = |y: f64| g.eval(y) / y;
    let fx = f(x);
    let knots = g.breakpoints();
    let near = |y: f64| {
        if y < 0.5 * x {
            f(y) * (f(x - y) - fx)
        } else {
            -fx * f(y)
        }
    };
    let b1 = shifted_breaks(x, &knots, &[0.5 * x]);
    let i1 = quad::integrate(near, 0.0, x, &b1, opts)?;
    let far = |z: f64| {
        let fxz = f(x + z);
        f(z) * (fxz - fx) + fx * fxz
    };
    let mut b2: Vec<f64> = knots.iter().flat_map(|&b| [b, b - x]).filter(|v| *v > 0.0).collect();
    b2.push(x);
    let i2 = quad::integrate_to_inf(far, 0.0, &b2, opts)?;
    Ok(2.0 * x.sqrt() * (i1 + i2))
}

/// `Q_N(V)(X) = X·Q̃(V/·)(X)` through the symmetric form; exact zero on constants.
pub fn q_n_sym<P: Profile + ?Sized>(v: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    Ok(x * qtilde_v(v, x, opts)?)
}

/// `Q_N(φ)(X)`.
///
/// Zero above `2R` without quadrature. Below `R/2` it uses `χ = 1 − φ`:
/// `Q_N(φ) = 2√X (J₁ + J₂ − J₃)` with
/// `J₁ = ∫ χ(Y−X)χ(Y)/((Y−X)Y)`, `J₂ = ∫ (χ(Y−X)−χ(Y))/(XY)`, `J₃ = ∫ χ(Y)/((Y−X)Y)`
/// over `Y > X`, so that the unit plateau never enters a cancellation.
pub fn qn_phi(phi: &CutoffProfile, x: f64, opts: &QuadOpts) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidRange(format!("X must be positive, got {x}")));
    }
    let r = phi.r;
    if x > 2.0 * r {
        return Ok(0.0);
    }
    if x >= 0.5 * r {
        return q_n_sym(phi, x, opts);
    }
    // phi.chi is φ − 1 = −(1 − φ); the products below use 1 − φ
    let c = |y: f64| -phi.chi(y);
    let h = 0.5 * r;
    let breaks = [h, r, x + h, x + r];
    let j1 = quad::integrate_to_inf(|y| c(y - x) * c(y) / ((y - x) * y), x + h, &breaks, opts)?;
    let j2 = quad::integrate(|y| (c(y - x) - c(y)) / (x * y), h, x + r, &breaks, opts)?;
    let j3 = quad::integrate_to_inf(|y| c(y) / ((y - x) * y), h, &breaks, opts)?;
    Ok(2.0 * x.sqrt() * (j1 + j2 - j3))
}

/// Empirical Lipschitz ratio
/// `‖Q_N(g)−Q_N(h)‖_{1/2−r, r+q} / (‖g−h‖_{−r, r+q} (‖g‖_{−r, r+q} + ‖h‖_{−r, r+q}))`
/// with all norms taken over the grid nodes.
pub fn qn_lipschitz_gap<P, Q>(grid: &Grid, g: &P, h: &Q, r: f64, q: f64, opts: &QuadOpts) -> Result<f64>
where
    P: Profile + ?Sized,
    Q: Profile + ?Sized,
{
    let nodes = grid.nodes();
    let w = |x: f64, theta: f64| x.powf(theta) * (1.0 + x).powf(r + q);
    let mut dn = 0.0f64;
    let mut gn = 0.0f64;
    let mut hn = 0.0f64;
    for &x in nodes {
        let (gv, hv) = (g.eval(x), h.eval(x));
        dn = dn.max(w(x, -r) * (gv - hv).abs());
        gn = gn.max(w(x, -r) * gv.abs());
        hn = hn.max(w(x, -r) * hv.abs());
    }
    if dn == 0.0 {
        return Err(Error::DivisionByZero("g and h coincide on the grid"));
    }
    let qg = map_nodes(nodes, |x| q_n(g, x, opts))?;
    let qh = map_nodes(nodes, |x| q_n(h, x, opts))?;
    let num = nodes
        .iter()
        .zip(qg.iter().zip(&qh))
        .map(|(&x, (a, b))| w(x, 0.5 - r) * (a - b).abs())
        .fold(0.0, f64::max);
    Ok(num / (dn * (gn + hn)))
}

/// [`qn_lipschitz_gap`] on sampled data.
pub fn qn_lipschitz_gap_sampled(
    g: &GridFunction,
    h: &GridFunction,
    tail: &TailModel,
    r: f64,
    q: f64,
    opts: &QuadOpts,
) -> Result<f64> {
    qn_lipschitz_gap(&g.grid, &g.v_profile(tail), &h.v_profile(tail), r, q, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::BaseProfile;

    #[test]
    fn rayleigh_jeans_is_stationary() {
        let o = QuadOpts::default();
        for &c in &[0.5, 1.0, 2.0] {
            for &x in &[1e-3, 0.7, 5.0, 300.0] {
                let v = qtilde(&|y: f64| c / y, x, &o).unwrap();
                assert!(v.abs() <= 1e-10, "c={c} x={x} {v}");
            }
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let o = QuadOpts::default();
        assert_eq!(qtilde(&|_y: f64| 0.0, 1.3, &o).unwrap(), 0.0);
        assert_eq!(qtilde_q(&|_y: f64| 0.0, 1.3, &o).unwrap(), 0.0);
        assert_eq!(q_n(&|_y: f64| 0.0, 1.3, &o).unwrap(), 0.0);
    }

    #[test]
    fn qn_phi_support() {
        let p = CutoffProfile::new(5.0, BaseProfile::Quintic).unwrap();
        assert_eq!(qn_phi(&p, 15.0, &QuadOpts::default()).unwrap(), 0.0);
        assert_eq!(qn_phi(&p, 10.0 + 1e-12, &QuadOpts::default()).unwrap(), 0.0);
    }

    #[test]
    fn qn_phi_branches_agree_at_switch() {
        let p = CutoffProfile::new(6.0, BaseProfile::Quintic).unwrap();
        let o = QuadOpts::default();
        let x = 3.0 - 1e-9;
        let reduced = qn_phi(&p, x, &o).unwrap();
        let direct = q_n_sym(&p, x, &o).unwrap();
        assert!((reduced - direct).abs() <= 1e-8 * direct.abs(), "{reduced} {direct}");
    }

    #[test]
    fn origin_growth_rejected() {
        let r = q_n(&|y: f64| y.powf(-0.3), 1.0, &QuadOpts::default());
        assert!(matches!(r, Err(Error::OriginDivergence(_))));
    }

    #[test]
    fn identical_arguments_signal() {
        let g = crate::grid::make_log_grid(1e-2, 10.0, 16).unwrap();
        let b = |y: f64| (-(y - 1.0) * (y - 1.0)).exp();
        let r = qn_lipschitz_gap(&g, &b, &b, 0.25, 1.0, &QuadOpts::default());
        assert!(matches!(r, Err(Error::DivisionByZero(_))));
    }
}
