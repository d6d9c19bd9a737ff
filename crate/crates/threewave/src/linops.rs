//! Linearization of `Q_N` around the Rayleigh-Jeans profile `V ≡ 1`: the
//! operator `ℒ`, the cutoff corrections `T₁`, `T₂`, their sum `ℒ_φ`, and the
//! decomposition residual
//! `X·Q̃((λφ+g)/X) − [λ² Q_N(φ) + κ λ ℒ_φ(g) + Q_N(g)]`.

use crate::collision::{q_n, qn_phi, qtilde_v, shifted_breaks};
use crate::error::{Error, Result};
use crate::grid::CutoffProfile;
use crate::profile::{Combo, Profile};
use crate::quad::{self, QuadOpts};

/// The factor κ in front of `λ ℒ_φ(g)` for which the decomposition identity
/// holds (established by `decomposition_residual` studies).
pub const CONVENTION_FACTOR: f64 = 2.0;

fn check_x(x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidRange(format!("X must be positive, got {x}")))
    }
}

/// `ℒ(g)(X) = X^{-1/2}∫_0^∞ (g(Y)−g(X))(1/|X−Y| − 1/(X+Y)) dY`.
pub fn ell<P: Profile + ?Sized>(g: &P, x: f64, opts: &QuadOpts) -> Result<f64> {
    check_x(x)?;
    let gx = g.eval(x);
    let integrand = |y: f64| {
        let d = g.eval(y) - gx;
        if d == 0.0 {
            return 0.0;
        }
        d * (1.0 / (x - y).abs() - 1.0 / (x + y))
    };
    let breaks = shifted_breaks(x, &g.breakpoints(), &[]);
    let i = quad::integrate_to_inf(integrand, 0.0, &breaks, opts)?;
    Ok(i / x.sqrt())
}

/// `T₁(g,φ)(X) = X^{-1/2}∫_0^∞ (g(Y)−g(X))(χ(|X−Y|)/|X−Y| − χ(X+Y)/(X+Y)) dY`, `χ = φ − 1`.
///
/// The integrand vanishes for `Y < R/2 − X`; quadrature starts there.
pub fn t1<P: Profile + ?Sized>(g: &P, phi: &CutoffProfile, x: f64, opts: &QuadOpts) -> Result<f64> {
    check_x(x)?;
    let (h, r) = (0.5 * phi.r, phi.r);
    let gx = g.eval(x);
    let integrand = |y: f64| {
        let d = g.eval(y) - gx;
        if d == 0.0 {
            return 0.0;
        }
        let u = (x - y).abs();
        let a = if u > h { phi.chi(u) / u } else { 0.0 };
        d * (a - phi.chi(x + y) / (x + y))
    };
    let start = (h - x).max(0.0);
    let mut breaks = shifted_breaks(x, &g.breakpoints(), &[x + h, x - h, x + r, x - r, h - x, r - x]);
    breaks.retain(|&b| b > start);
    let i = quad::integrate_to_inf(integrand, start, &breaks, opts)?;
    Ok(i / x.sqrt())
}

/// `T₂(g,φ)(X) = X^{-1/2}∫_{X/2}^∞ [sign(X−Y)(g(Y)/Y)(φ(|X−Y|)−φ(X)) + (φ(Y)−φ(X)) g(|X−Y|)/|X−Y|] dY`.
///
/// The range starts at `X/2`, matching the symmetrized collision integral;
/// with this range `ℒ + T₁ + T₂` is exactly the linearization of `Q_N` at `φ`.
pub fn t2<P: Profile + ?Sized>(g: &P, phi: &CutoffProfile, x: f64, opts: &QuadOpts) -> Result<f64> {
    check_x(x)?;
    let (h, r) = (0.5 * phi.r, phi.r);
    let px = phi.phi(x);
    let integrand = |y: f64| {
        let u = (x - y).abs();
        if u == 0.0 {
            return 0.0;
        }
        let s = if x > y { 1.0 } else { -1.0 };
        let dphi_u = phi.phi(u) - px;
        let dphi_y = phi.phi(y) - px;
        let a = if dphi_u == 0.0 { 0.0 } else { s * g.eval(y) / y * dphi_u };
        let b = if dphi_y == 0.0 { 0.0 } else { dphi_y * g.eval(u) / u };
        a + b
    };
    let start = if x < h { h.max(0.5 * x) } else { 0.5 * x };
    let mut breaks = shifted_breaks(x, &g.breakpoints(), &[h, r, x + h, x - h, x + r, x - r]);
    breaks.retain(|&b| b > start);
    let i = quad::integrate_to_inf(integrand, start, &breaks, opts)?;
    Ok(i / x.sqrt())
}

/// `ℒ_φ = ℒ + T₁ + T₂`.
pub fn ell_phi<P: Profile + ?Sized>(g: &P, phi: &CutoffProfile, x: f64, opts: &QuadOpts) -> Result<f64> {
    Ok(ell(g, x, opts)? + t1(g, phi, x, opts)? + t2(g, phi, x, opts)?)
}

/// Terms of the decomposition at one `X`.
#[derive(Clone, Copy, Debug)]
pub struct Decomposition {
    /// `X·Q̃(f,f)(X)` with `f = (λφ+g)/X`.
    pub full: f64,
    pub source: f64,
    pub linear: f64,
    pub nonlinear: f64,
}

impl Decomposition {
    pub fn residual(&self, factor: f64) -> f64 {
        self.full - (self.source + factor * self.linear + self.nonlinear)
    }

    /// Residual relative to the largest term magnitude.
    pub fn relative(&self, factor: f64) -> f64 {
        let scale = self.full.abs().max(self.source.abs()).max(self.linear.abs()).max(self.nonlinear.abs());
        if scale == 0.0 {
            0.0
        } else {
            self.residual(factor).abs() / scale
        }
    }
}

pub fn decompose<P: Profile + ?Sized>(
    lambda: f64,
    g: &P,
    phi: &CutoffProfile,
    x: f64,
    opts: &QuadOpts,
) -> Result<Decomposition> {
    check_x(x)?;
    let v = Combo { a: lambda, p: phi, b: 1.0, q: g };
    let full = x * qtilde_v(&v, x, opts)?;
    let source = if lambda == 0.0 { 0.0 } else { lambda * lambda * qn_phi(phi, x, opts)? };
    let linear = if lambda == 0.0 { 0.0 } else { lambda * ell_phi(g, phi, x, opts)? };
    let nonlinear = q_n(g, x, opts)?;
    Ok(Decomposition { full, source, linear, nonlinear })
}

/// `X·Q̃(f,f)(X) − [λ²·Q_N(φ)(X) + κ·λ·ℒ_φ(g)(X) + Q_N(g)(X)]` with `f = (λφ+g)/X`.
pub fn decomposition_residual<P: Profile + ?Sized>(
    lambda: f64,
    g: &P,
    phi: &CutoffProfile,
    x: f64,
    convention_factor: f64,
    opts: &QuadOpts,
) -> Result<f64> {
    Ok(decompose(lambda, g, phi, x, opts)?.residual(convention_factor))
}
