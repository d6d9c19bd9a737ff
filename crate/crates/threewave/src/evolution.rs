//! Explicit time integration of `V_t = Q_N(V)` and of the coupled system
//! `V_τ = n Q_N(V)`, `n_τ = −n ∫ Q̃(V/X) √X dX`.

use crate::collision::{map_nodes, q_n_sym, TailModel};
use crate::error::{Error, Result};
use crate::grid::{extrapolate_origin, GridFunction, Sampled};
use crate::moments::flux_limit;
use crate::profile::OverX;
use crate::quad::QuadOpts;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoupledState {
    /// `V(X) = X·F(X)`
    pub v: GridFunction,
    pub n: f64,
    pub tau: f64,
    /// `t = ∫_0^τ n(σ) dσ`
    pub t_internal: f64,
}

impl CoupledState {
    pub fn new(v: GridFunction, n: f64) -> Result<Self> {
        if !(n > 0.0) {
            return Err(Error::NonPositiveCondensate(n));
        }
        Ok(CoupledState { v, n, tau: 0.0, t_internal: 0.0 })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// How `n'` is obtained in coupled runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FluxMode {
    /// Weak-form double integral on the interpolated spectrum.
    WeakForm,
    /// Grid quadrature of the node values `Q_N(V)·X^{-1/2}` already computed
    /// for the `V` update (the same linear functional as the number moment).
    Nodal,
}

/// Integrator settings shared by the reduced and coupled steppers.
#[derive(Clone, Copy, Debug)]
pub struct Stepper {
    pub opts: QuadOpts,
    /// tail exponent `q`; the amplitude is matched to `V(X_max)` at every stage
    pub tail_exponent: f64,
    pub c_stab: f64,
    pub flux_mode: FluxMode,
}

impl Default for Stepper {
    fn default() -> Self {
        Stepper { opts: QuadOpts { rel: 1e-9, abs: 1e-10, ..Default::default() }, tail_exponent: 2.0, c_stab: 0.5, flux_mode: FluxMode::Nodal }
    }
}

impl Stepper {
    pub fn profile(&self, v: &GridFunction) -> Result<Sampled> {
        let n = v.values.len();
        let tail = TailModel::matched(v.values[n - 1], v.grid.x_max(), self.tail_exponent)?;
        Ok(v.v_profile(&tail))
    }

    /// `Q_N(V)` at every node.
    pub fn rhs(&self, v: &GridFunction) -> Result<Vec<f64>> {
        if v.values.iter().all(|&x| x == 0.0) {
            return Ok(vec![0.0; v.values.len()]);
        }
        let p = self.profile(v)?;
        map_nodes(v.nodes(), |x| q_n_sym(&p, x, &self.opts))
    }

    /// Weak-form flux `∫ Q̃(V/X) √X dX` of the interpolated spectrum.
    pub fn flux(&self, v: &GridFunction) -> Result<f64> {
        if v.values.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        let p = self.profile(v)?;
        let opts = QuadOpts { rel: self.opts.rel * 10.0, ..self.opts };
        flux_limit(&OverX(&p), &opts)
    }

    /// Flux by the configured mode.
    pub fn measure_flux(&self, v: &GridFunction) -> Result<f64> {
        match self.flux_mode {
            FluxMode::WeakForm => self.flux(v),
            FluxMode::Nodal => Ok(self.nodal_flux(v, &self.rhs(v)?)),
        }
    }

    /// `d/dτ` of the discrete number moment of `grid_moments` per unit `n`,
    /// given node values of `Q_N(V)`; with this flux `n + M_{1/2}` is a linear
    /// invariant of the scheme.
    pub fn nodal_flux(&self, v: &GridFunction, qn: &[f64]) -> f64 {
        let g = &v.grid;
        let vals: Vec<f64> = g.nodes().iter().zip(qn).map(|(x, q)| q * x.sqrt()).collect();
        let tail = TailModel::matched(1.0, g.x_max(), self.tail_exponent)
            .and_then(|t| t.moment_tail(g.x_max(), 0.5))
            .unwrap_or(0.0);
        g.integrate_log(&vals) + 2.0 * qn[0] * g.x_min().sqrt() + tail * qn[qn.len() - 1]
    }

    /// `c_stab / max_X 2X^{-1/2} ∫ |F| dY`.
    pub fn stable_dt(&self, v: &GridFunction) -> f64 {
        let abs: Vec<f64> = v.values.iter().map(|x| x.abs()).collect();
        let mass = v.grid.integrate_log(&abs) + abs[0];
        if mass == 0.0 {
            return f64::INFINITY;
        }
        let rate = 2.0 * mass / v.grid.x_min().sqrt();
        self.c_stab / rate
    }

    fn check_sign(before: &GridFunction, after: &GridFunction) -> Result<()> {
        if before.values.iter().all(|&x| x > 0.0) {
            let flips = after.values.iter().filter(|&&x| x <= 0.0).count();
            if flips * 20 > after.values.len() {
                return Err(Error::Stability(format!("{flips} of {} nodes changed sign", after.values.len())));
            }
        }
        Ok(())
    }

    /// One classical RK4 step of `V_t = Q_N(V)`.
    pub fn step_reduced(&self, v: &GridFunction, dt: f64) -> Result<GridFunction> {
        if !(dt > 0.0) {
            return Err(Error::InvalidRange(format!("dt must be positive, got {dt}")));
        }
        let axpy = |a: f64, k: &[f64]| -> GridFunction {
            let values = v.values.iter().zip(k).map(|(x, d)| x + a * d).collect();
            GridFunction { values, ..v.clone() }
        };
        let k1 = self.rhs(v)?;
        let k2 = self.rhs(&axpy(0.5 * dt, &k1))?;
        let k3 = self.rhs(&axpy(0.5 * dt, &k2))?;
        let k4 = self.rhs(&axpy(dt, &k3))?;
        let values = (0..v.values.len())
            .map(|i| v.values[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let out = GridFunction { values, ..v.clone() };
        Self::check_sign(v, &out)?;
        Ok(out)
    }

    fn coupled_rhs(&self, v: &GridFunction, n: f64) -> Result<(Vec<f64>, f64)> {
        let q = self.rhs(v)?;
        let flux = match self.flux_mode {
            FluxMode::WeakForm => self.flux(v)?,
            FluxMode::Nodal => self.nodal_flux(v, &q),
        };
        Ok((q.iter().map(|x| n * x).collect(), -n * flux))
    }

    /// One RK4 step of the coupled system; `t_internal` is advanced with the
    /// same stages.
    pub fn step_coupled(&self, s: &CoupledState, dtau: f64) -> Result<CoupledState> {
        if !(dtau > 0.0) {
            return Err(Error::InvalidRange(format!("dτ must be positive, got {dtau}")));
        }
        let shifted = |a: f64, kv: &[f64], kn: f64| -> (GridFunction, f64) {
            let values = s.v.values.iter().zip(kv).map(|(x, d)| x + a * d).collect();
            (GridFunction { values, ..s.v.clone() }, s.n + a * kn)
        };
        let (k1, m1) = self.coupled_rhs(&s.v, s.n)?;
        let (v2, n2) = shifted(0.5 * dtau, &k1, m1);
        let (k2, m2) = self.coupled_rhs(&v2, n2)?;
        let (v3, n3) = shifted(0.5 * dtau, &k2, m2);
        let (k3, m3) = self.coupled_rhs(&v3, n3)?;
        let (v4, n4) = shifted(dtau, &k3, m3);
        let (k4, m4) = self.coupled_rhs(&v4, n4)?;
        let values = (0..s.v.values.len())
            .map(|i| s.v.values[i] + dtau / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        let n = s.n + dtau / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
        if !(n > 0.0) {
            return Err(Error::NonPositiveCondensate(n));
        }
        let dt = dtau / 6.0 * (s.n + 2.0 * n2 + 2.0 * n3 + n4);
        let v = GridFunction { values, ..s.v.clone() };
        Self::check_sign(&s.v, &v)?;
        Ok(CoupledState { v, n, tau: s.tau + dtau, t_internal: s.t_internal + dt })
    }
}

/// `∫ F X^{1/2} dX` and `∫ F X^{3/2} dX` of a sampled `V`, by the log-trapezoid
/// rule on the grid with constant continuation of `V` below `X_1` and the
/// tail power law above `X_max`.
pub fn grid_moments(v: &GridFunction, tail_exponent: f64) -> Result<(f64, f64)> {
    let g = &v.grid;
    let x1 = g.x_min();
    let v1 = v.values[0];
    let half: Vec<f64> = g.nodes().iter().zip(&v.values).map(|(x, y)| y * x.sqrt()).collect();
    let three: Vec<f64> = g.nodes().iter().zip(&v.values).map(|(x, y)| y * x.powf(1.5)).collect();
    let n = v.values.len();
    let tail = TailModel::matched(v.values[n - 1], g.x_max(), tail_exponent)?;
    let m_half = g.integrate_log(&half) + 2.0 * v1 * x1.sqrt() + tail.moment_tail(g.x_max(), 0.5)?;
    let m_three = g.integrate_log(&three) + 2.0 / 3.0 * v1 * x1.powf(1.5) + tail.moment_tail(g.x_max(), 1.5)?;
    Ok((m_half, m_three))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub tau: f64,
    pub t_internal: f64,
    pub n: f64,
    pub lambda_hat: f64,
    pub m_half: f64,
    pub m_threehalf: f64,
    pub flux: f64,
}

#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    /// CSV `tau,t_internal,n,lambda_hat,M_half,M_threehalf,flux`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau", "t_internal", "n", "lambda_hat", "M_half", "M_threehalf", "flux"])?;
        for r in &self.rows {
            w.write_record(
                [r.tau, r.t_internal, r.n, r.lambda_hat, r.m_half, r.m_threehalf, r.flux].map(|v| format!("{v:.16e}")),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    /// `n(τ)·exp(−k ∫_0^τ λ̂²)` along the rows (trapezoid in τ).
    pub fn condensate_invariant(&self, k: f64) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.rows.len());
        for (i, r) in self.rows.iter().enumerate() {
            if i > 0 {
                let p = &self.rows[i - 1];
                acc += 0.5 * (r.tau - p.tau) * (p.lambda_hat.powi(2) + r.lambda_hat.powi(2));
            }
            out.push(r.n * (-k * acc).exp());
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Horizon {
    /// integrate to this physical time
    Tau(f64),
    /// stop once `λ̂` moved by this fraction of its initial value
    LambdaDrift(f64),
}

#[derive(Clone, Copy, Debug)]
pub struct RunSettings {
    pub horizon: Horizon,
    /// hard cap on τ for drift-based horizons
    pub max_tau: f64,
    pub max_steps: usize,
    pub record_every: usize,
    pub fit_exponent: f64,
    /// fixed step; `None` uses the stability bound every step
    pub dt: Option<f64>,
}

/// Result of a run: the trajectory, the last good state and the error that
/// stopped the run early, if any.
pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub state: CoupledState,
    pub error: Option<Error>,
    /// `∫ λ̂² dτ` accumulated by the trapezoid rule over every step
    pub lambda_sq_integral: f64,
}

impl RunOutcome {
    /// `n(τ)·exp(−k ∫ λ̂²)` at the final state.
    pub fn condensate_invariant(&self, k: f64) -> f64 {
        self.state.n * (-k * self.lambda_sq_integral).exp()
    }
}

fn lambda_hat(v: &GridFunction, r: f64) -> f64 {
    if v.values.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    extrapolate_origin(v, r).unwrap_or(f64::NAN)
}

/// Integrates the coupled system, recording a row every `record_every` steps
/// and at the end.
pub fn run_coupled(stepper: &Stepper, initial: CoupledState, settings: &RunSettings) -> RunOutcome {
    let mut traj = Trajectory::default();
    let mut state = initial;
    let mut lambda_sq_integral = 0.0;
    let record = |s: &CoupledState, traj: &mut Trajectory| -> Result<()> {
        let (m_half, m_threehalf) = grid_moments(&s.v, stepper.tail_exponent)?;
        let flux = stepper.flux(&s.v)?;
        traj.rows.push(TrajectoryRow {
            tau: s.tau,
            t_internal: s.t_internal,
            n: s.n,
            lambda_hat: lambda_hat(&s.v, settings.fit_exponent),
            m_half,
            m_threehalf,
            flux,
        });
        Ok(())
    };
    if let Err(e) = record(&state, &mut traj) {
        return RunOutcome { trajectory: traj, state, error: Some(e), lambda_sq_integral };
    }
    let lambda0 = traj.rows[0].lambda_hat;
    let mut lam_prev = lambda0;
    let tau_end = match settings.horizon {
        Horizon::Tau(t) => t,
        Horizon::LambdaDrift(_) => settings.max_tau,
    };
    let mut steps = 0;
    while state.tau < tau_end * (1.0 - 1e-12) && steps < settings.max_steps {
        let dt = settings.dt.unwrap_or_else(|| stepper.stable_dt(&state.v).min(1e300) / state.n.max(1e-300));
        let dt = dt.min(tau_end - state.tau);
        match stepper.step_coupled(&state, dt) {
            Ok(s) => state = s,
            Err(e) => return RunOutcome { trajectory: traj, state, error: Some(e), lambda_sq_integral },
        }
        steps += 1;
        let lam = lambda_hat(&state.v, settings.fit_exponent);
        lambda_sq_integral += 0.5 * dt * (lam_prev * lam_prev + lam * lam);
        lam_prev = lam;
        let drift_done = match settings.horizon {
            Horizon::LambdaDrift(f) => lambda0 != 0.0 && ((lam - lambda0) / lambda0).abs() >= f,
            Horizon::Tau(_) => false,
        };
        let last = drift_done || state.tau >= tau_end * (1.0 - 1e-12) || steps >= settings.max_steps;
        if steps % settings.record_every.max(1) == 0 || last {
            if let Err(e) = record(&state, &mut traj) {
                return RunOutcome { trajectory: traj, state, error: Some(e), lambda_sq_integral };
            }
        }
        if drift_done {
            break;
        }
    }
    RunOutcome { trajectory: traj, state, error: None, lambda_sq_integral }
}

/// Maps between the physical clock `τ`, the internal clock `t = ∫ n dτ` and
/// `τ̄ = ∫ λ dt`, from traces sampled at common points.
#[derive(Clone, Debug)]
pub struct TimeMaps {
    pub tau: Vec<f64>,
    pub t: Vec<f64>,
    pub taubar: Vec<f64>,
}

fn interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let n = xs.len();
    let i = match xs.binary_search_by(|v| v.total_cmp(&x)) {
        Ok(i) => return ys[i],
        Err(0) => 0,
        Err(i) if i >= n => n - 2,
        Err(i) => i - 1,
    };
    let s = (x - xs[i]) / (xs[i + 1] - xs[i]);
    ys[i] + s * (ys[i + 1] - ys[i])
}

impl TimeMaps {
    pub fn t_of_tau(&self, tau: f64) -> f64 {
        interp(&self.tau, &self.t, tau)
    }

    pub fn tau_of_t(&self, t: f64) -> f64 {
        interp(&self.t, &self.tau, t)
    }

    pub fn taubar_of_t(&self, t: f64) -> f64 {
        interp(&self.t, &self.taubar, t)
    }
}

/// Builds the maps by trapezoid accumulation of `n` over `τ` and of `λ` over `t`.
pub fn time_maps(tau: &[f64], n: &[f64], lambda: &[f64]) -> Result<TimeMaps> {
    if tau.len() < 2 || n.len() != tau.len() || lambda.len() != tau.len() {
        return Err(Error::InvalidRange("traces must share at least two sample points".into()));
    }
    for i in 1..tau.len() {
        if !(tau[i] > tau[i - 1]) {
            return Err(Error::NonmonotoneTrace(i));
        }
    }
    for (i, (&a, &b)) in n.iter().zip(lambda).enumerate() {
        if !(a > 0.0) || !(b > 0.0) {
            return Err(Error::NonmonotoneTrace(i));
        }
    }
    let mut t = vec![0.0; tau.len()];
    let mut taubar = vec![0.0; tau.len()];
    for i in 1..tau.len() {
        t[i] = t[i - 1] + 0.5 * (tau[i] - tau[i - 1]) * (n[i] + n[i - 1]);
        taubar[i] = taubar[i - 1] + 0.5 * (t[i] - t[i - 1]) * (lambda[i] + lambda[i - 1]);
    }
    Ok(TimeMaps { tau: tau.to_vec(), t, taubar })
}
