//! Browser bindings. Every function returns a flat `Float64Array` of rows so
//! the page can plot without further decoding.

use num_complex::Complex64;
use threewave::collision::qn_phi;
use threewave::grid::{make_log_grid, BaseProfile, CutoffProfile};
use threewave::mellin::{w_eval, BFunction, ContourSpec};
use threewave::moments::flux_ladder;
use threewave::quad::QuadOpts;
use threewave::scenario::cutoff_spectrum;
use wasm_bindgen::prelude::*;

fn js(e: threewave::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn base(id: &str) -> Result<BaseProfile, JsValue> {
    match id {
        "quintic" => Ok(BaseProfile::Quintic),
        "septic" => Ok(BaseProfile::Septic),
        _ => Err(JsValue::from_str("base must be quintic or septic")),
    }
}

/// Rows `(Im s, W_re, W_im, B_re, B_im)` along `Re s = re`, `W` taken at `s`.
#[wasm_bindgen]
pub fn mellin_line(re: f64, im_max: f64, n: usize) -> Result<Vec<f64>, JsValue> {
    if n < 2 || !(im_max > 0.0) {
        return Err(JsValue::from_str("need n ≥ 2 and a positive range"));
    }
    let spec = ContourSpec { panels: 2048, ..ContourSpec::b_default() };
    let b = BFunction::new(&spec, -im_max, im_max).map_err(js)?;
    let mut out = Vec::with_capacity(5 * n);
    for k in 0..n {
        let im = -im_max + 2.0 * im_max * k as f64 / (n - 1) as f64;
        let s = Complex64::new(re, im);
        let w = w_eval(s).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        let bv = b.eval(s).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
        out.extend([im, w.re, w.im, bv.re, bv.im]);
    }
    Ok(out)
}

/// Rows `(X, Q_N(φ)(X), C(φ)√X)` on a log grid over `[1e-4 R, 3R]`.
#[wasm_bindgen]
pub fn qnphi_profile(r: f64, base_id: &str, n: usize) -> Result<Vec<f64>, JsValue> {
    let phi = CutoffProfile::new(r, base(base_id)?).map_err(js)?;
    let grid = make_log_grid(1e-4 * r, 3.0 * r, n.max(16)).map_err(js)?;
    let opts = QuadOpts::with_rel(1e-8);
    let c = phi.c_phi();
    let mut out = Vec::with_capacity(3 * grid.len());
    for &x in grid.nodes() {
        let q = qn_phi(&phi, x, &opts).map_err(js)?;
        out.extend([x, q, c * x.sqrt()]);
    }
    Ok(out)
}

/// Rows `(δ, A1, A2, A1+A2)` for `F = λφ/X` on the ladder `δ_k = 10^{−k}`,
/// followed by the extrapolated row with `δ = 0`.
#[wasm_bindgen]
pub fn flux_rows(lambda: f64, r: f64, rungs: usize) -> Result<Vec<f64>, JsValue> {
    let phi = CutoffProfile::new(r, BaseProfile::Quintic).map_err(js)?;
    let f = cutoff_spectrum(&phi, lambda);
    let deltas: Vec<f64> = (1..=rungs.clamp(3, 6)).map(|k| 10f64.powi(-(k as i32))).collect();
    let rep = flux_ladder(&f, &deltas, &QuadOpts::with_rel(1e-8)).map_err(js)?;
    let mut out = Vec::with_capacity(4 * (rep.rows.len() + 1));
    for row in &rep.rows {
        out.extend([row.delta, row.a1, row.a2, row.total()]);
    }
    out.extend([0.0, rep.a1, rep.a2, rep.total()]);
    Ok(out)
}
