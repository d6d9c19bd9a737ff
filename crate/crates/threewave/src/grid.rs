//! Log-uniform energy grids, sampled functions, weighted norms and the cutoff
//! profile of the initial data.

use crate::collision::TailModel;
use crate::error::{Error, Result};
use crate::profile::{Pchip, Profile};
use crate::quad::{self, QuadOpts};
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

/// Log-uniform grid from `x_min` to `x_max` with `n` nodes.
///
/// Weights are the trapezoid rule on `[x_min, x_max]` plus an origin panel
/// `[0, x_min]` assigned to the first node, so they integrate over `(0, x_max]`
/// with constant continuation below the first node.
pub fn make_log_grid(x_min: f64, x_max: f64, n: usize) -> Result<Grid> {
    if !(x_min > 0.0) || !(x_min < x_max) || !x_max.is_finite() {
        return Err(Error::InvalidRange(format!("need 0 < x_min < x_max, got ({x_min}, {x_max})")));
    }
    if n < 16 {
        return Err(Error::InvalidRange(format!("need at least 16 nodes, got {n}")));
    }
    let lr = (x_max / x_min).ln();
    let mut nodes: Vec<f64> = (0..n).map(|i| x_min * (lr * i as f64 / (n - 1) as f64).exp()).collect();
    nodes[0] = x_min;
    nodes[n - 1] = x_max;
    let mut weights = vec![0.0; n];
    for i in 0..n - 1 {
        let h = 0.5 * (nodes[i + 1] - nodes[i]);
        weights[i] += h;
        weights[i + 1] += h;
    }
    weights[0] += x_min;
    Ok(Grid { nodes, weights })
}

impl Grid {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_min(&self) -> f64 {
        self.nodes[0]
    }

    pub fn x_max(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    /// Constant ratio between consecutive nodes.
    pub fn ratio(&self) -> f64 {
        (self.x_max() / self.x_min()).powf(1.0 / (self.len() - 1) as f64)
    }

    /// `∫_0^{x_max}` with the origin panel.
    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    /// Trapezoid integral over `[x_min, x_max]` only.
    pub fn integrate_span(&self, values: &[f64]) -> f64 {
        self.nodes
            .windows(2)
            .zip(values.windows(2))
            .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
            .sum()
    }

    /// Trapezoid integral of `values` against `d ln X` over `[x_min, x_max]`.
    pub fn integrate_log(&self, values: &[f64]) -> f64 {
        let h = self.ratio().ln();
        let n = values.len();
        h * (values.iter().sum::<f64>() - 0.5 * (values[0] + values[n - 1]))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub theta: Option<f64>,
    pub rho: Option<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidRange(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidRange(format!("non-finite value at node {i}")));
        }
        Ok(GridFunction { grid, values, theta: None, rho: None })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        GridFunction::new(grid.clone(), values)
    }

    /// Tags the function with a weighted space `X_{θ,ρ}`; the norm must be finite.
    pub fn with_space(mut self, theta: f64, rho: f64) -> Result<Self> {
        let norm = weighted_norm(&self, theta, rho);
        if !norm.is_finite() {
            return Err(Error::InvalidRange(format!("infinite ({theta}, {rho}) norm")));
        }
        self.theta = Some(theta);
        self.rho = Some(rho);
        Ok(self)
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn map(&self, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        let values = self.nodes().iter().zip(&self.values).map(|(&x, &v)| f(x, v)).collect();
        GridFunction { grid: self.grid.clone(), values, theta: self.theta, rho: self.rho }
    }

    /// Treats the samples as `V = X·F` and returns the interpolated `V`.
    pub fn v_profile(&self, tail: &TailModel) -> Sampled {
        Sampled::new(self.nodes(), &self.values, tail, false)
    }

    /// Treats the samples as `F`; interpolation still runs on `X·F`.
    pub fn f_profile(&self, tail: &TailModel) -> Sampled {
        let v: Vec<f64> = self.nodes().iter().zip(&self.values).map(|(x, f)| x * f).collect();
        Sampled::new(self.nodes(), &v, tail, true)
    }

    /// CSV with header `X,value`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["X", "value"])?;
        for (x, v) in self.nodes().iter().zip(&self.values) {
            w.write_record([format!("{x:.16e}"), format!("{v:.16e}")])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads `X,value` rows; the nodes must form a log-uniform grid.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.len() != 2 || &header[0] != "X" || &header[1] != "value" {
            return Err(Error::Config(format!("expected header X,value, got {header:?}")));
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| Error::Config(format!("bad number {s:?}: {e}")));
            xs.push(parse(&rec[0])?);
            vs.push(parse(&rec[1])?);
        }
        if xs.len() < 2 {
            return Err(Error::Config("fewer than two rows".into()));
        }
        let grid = make_log_grid(xs[0], xs[xs.len() - 1], xs.len())?;
        for (a, b) in grid.nodes().iter().zip(&xs) {
            if (a - b).abs() > 1e-12 * a.abs() {
                return Err(Error::Config(format!("node {b} is not on a log-uniform grid")));
            }
        }
        GridFunction::new(grid, vs)
    }
}

/// `max_i X_i^θ (1+X_i)^ρ |g(X_i)|`.
pub fn weighted_norm(g: &GridFunction, theta: f64, rho: f64) -> f64 {
    g.nodes()
        .iter()
        .zip(&g.values)
        .map(|(&x, &v)| if v == 0.0 { 0.0 } else { x.powf(theta) * (1.0 + x).powf(rho) * v.abs() })
        .fold(0.0, f64::max)
}

/// Intercept `λ` of the least-squares fit `V(X_i) ≈ λ + c X_i^r` over the
/// eight smallest nodes.
pub fn extrapolate_origin(v: &GridFunction, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 0.5) {
        return Err(Error::InvalidRange(format!("fit exponent must lie in (0, 1/2), got {r}")));
    }
    let m = v.values.len().min(8);
    if m < 4 {
        return Err(Error::InvalidRange("need at least four nodes".into()));
    }
    let t: Vec<f64> = v.nodes()[..m].iter().map(|x| x.powf(r)).collect();
    let y = &v.values[..m];
    let mf = m as f64;
    let tm = t.iter().sum::<f64>() / mf;
    let ym = y.iter().sum::<f64>() / mf;
    let stt: f64 = t.iter().map(|ti| (ti - tm) * (ti - tm)).sum();
    let sty: f64 = t.iter().zip(y).map(|(ti, yi)| (ti - tm) * (yi - ym)).sum();
    // condition number of the design matrix [1, t] from its Gram matrix
    let st: f64 = t.iter().sum();
    let st2: f64 = t.iter().map(|x| x * x).sum();
    let tr = mf + st2;
    let det = mf * st2 - st * st;
    let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lmax = 0.5 * (tr + disc);
    let lmin = det / lmax;
    let cond = if lmin > 0.0 { (lmax / lmin).sqrt() } else { f64::INFINITY };
    if !(cond <= 1e10) || stt == 0.0 {
        return Err(Error::IllConditionedFit(cond));
    }
    let c = sty / stt;
    Ok(ym - c * tm)
}

/// Interpolated spectrum built from grid samples of `V`.
///
/// `V` is interpolated monotonically in `ln X`, continued as the constant
/// `V(X_1)` below the first node and by the tail power law beyond `X_max`.
/// In `F` mode `eval` returns `V(x)/x`.
#[derive(Clone, Debug)]
pub struct Sampled {
    pchip: Pchip,
    x1: f64,
    v1: f64,
    xmax: f64,
    tail_c: f64,
    tail_q: f64,
    as_f: bool,
}

impl Sampled {
    fn new(nodes: &[f64], v: &[f64], tail: &TailModel, as_f: bool) -> Self {
        let t: Vec<f64> = nodes.iter().map(|x| x.ln()).collect();
        Sampled {
            pchip: Pchip::new(t, v.to_vec()),
            x1: nodes[0],
            v1: v[0],
            xmax: nodes[nodes.len() - 1],
            tail_c: tail.amplitude,
            tail_q: tail.exponent,
            as_f,
        }
    }

    pub fn v(&self, x: f64) -> f64 {
        if x <= self.x1 {
            self.v1
        } else if x <= self.xmax {
            self.pchip.eval(x.ln())
        } else if self.tail_c == 0.0 {
            0.0
        } else {
            self.tail_c * x.powf(-self.tail_q)
        }
    }

    pub fn span(&self) -> (f64, f64) {
        (self.x1, self.xmax)
    }
}

impl Profile for Sampled {
    fn eval(&self, x: f64) -> f64 {
        if self.as_f {
            self.v(x) / x
        } else {
            self.v(x)
        }
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![self.x1, self.xmax]
    }
}

/// Base bridge `φ̂` on `[1/2, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseProfile {
    /// `1 − S(u)` with the quintic smoothstep `S = 6u⁵ − 15u⁴ + 10u³` (C²).
    Quintic,
    /// `1 − S(u)` with the septic smoothstep `S = −20u⁷ + 70u⁶ − 84u⁵ + 35u⁴` (C³).
    Septic,
}

/// `φ(X) = φ̂(X/R)`: one on `(0, R/2]`, zero on `[R, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub r: f64,
    pub base: BaseProfile,
}

impl CutoffProfile {
    pub fn new(r: f64, base: BaseProfile) -> Result<Self> {
        if !(r > 1.0) || !r.is_finite() {
            return Err(Error::InvalidRange(format!("cutoff scale R must exceed 1, got {r}")));
        }
        Ok(CutoffProfile { r, base })
    }

    pub fn alpha(&self) -> f64 {
        0.5
    }

    pub fn beta(&self) -> f64 {
        1.0
    }

    pub fn phi_hat(&self, z: f64) -> f64 {
        if z <= 0.5 {
            return 1.0;
        }
        if z >= 1.0 {
            return 0.0;
        }
        let u = 2.0 * z - 1.0;
        let s = match self.base {
            BaseProfile::Quintic => u * u * u * (10.0 + u * (-15.0 + 6.0 * u)),
            BaseProfile::Septic => u.powi(4) * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u))),
        };
        1.0 - s
    }

    /// Derivative of `φ̂`.
    pub fn phi_hat_prime(&self, z: f64) -> f64 {
        if z <= 0.5 || z >= 1.0 {
            return 0.0;
        }
        let u = 2.0 * z - 1.0;
        let ds = match self.base {
            BaseProfile::Quintic => 30.0 * u * u * (1.0 - u) * (1.0 - u),
            BaseProfile::Septic => 140.0 * u.powi(3) * (1.0 - u).powi(3),
        };
        -2.0 * ds
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.phi_hat(x / self.r)
    }

    /// `χ = φ − 1`, nonzero only above `R/2`.
    pub fn chi(&self, x: f64) -> f64 {
        let z = x / self.r;
        if z <= 0.5 {
            0.0
        } else if z >= 1.0 {
            -1.0
        } else {
            self.phi_hat(z) - 1.0
        }
    }

    /// `C(φ) = (1/R)(∫_{1/2}^1 φ̂(z)² z^{-2} dz − 2)`.
    pub fn c_phi(&self) -> f64 {
        let i = quad::integrate(|z| self.phi_hat(z).powi(2) / (z * z), 0.5, 1.0, &[], &QuadOpts::default())
            .expect("smooth integrand");
        (i - 2.0) / self.r
    }
}

impl Profile for CutoffProfile {
    fn eval(&self, x: f64) -> f64 {
        self.phi(x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        vec![0.5 * self.r, self.r]
    }
}
