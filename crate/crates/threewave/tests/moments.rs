use std::f64::consts::PI;
use threewave::grid::{BaseProfile, CutoffProfile};
use threewave::moments::{a_delta_split, flux_integral, flux_ladder, flux_limit, moment, richardson};
use threewave::profile::{bump, kinked, Profile};
use threewave::quad::QuadOpts;
use threewave::scenario::cutoff_spectrum;

const LADDER: [f64; 3] = [1e-2, 1e-3, 1e-4];

fn opts() -> QuadOpts {
    QuadOpts::with_rel(1e-10)
}

#[test]
fn zero_spectrum_has_zero_split() {
    assert_eq!(a_delta_split(&|_x: f64| 0.0, 1e-3, &opts()).unwrap(), (0.0, 0.0));
    assert_eq!(moment(&|_x: f64| 0.0, 0.5, &opts()).unwrap(), 0.0);
}

#[test]
fn moment_examples() {
    let m = moment(&|x: f64| (-x).exp(), 0.5, &opts()).unwrap();
    assert!((m - PI.sqrt() / 2.0).abs() <= 1e-8);
    let f = kinked(|x: f64| if x < 1.0 { 1.0 / x } else { 0.0 }, &[1.0]);
    assert!((moment(&f, 0.5, &opts()).unwrap() - 2.0).abs() <= 1e-8);
}

#[test]
fn split_sums_to_flux() {
    let f = bump(0.5, 2.0, 0.7);
    let (a1, a2) = a_delta_split(&f, 0.1, &opts()).unwrap();
    assert_eq!(a1 + a2, flux_integral(&f, 0.1, &opts()).unwrap());
}

#[test]
fn compact_support_carries_no_flux() {
    let f = bump(0.5, 2.0, 0.7);
    let zero = flux_limit(&f, &opts()).unwrap();
    assert!(zero.abs() <= 1e-12, "{zero}");
    // below the support the gain term 2∫F(Y−X)F(Y)dY survives, so
    // flux(δ) = −2δ∫F² + O(δ²) rather than a constant
    let sq = kinked(|x: f64| bump(0.5, 2.0, 0.7).eval(x).powi(2), &[0.5, 2.0]);
    let slope = -2.0 * moment(&sq, 0.0, &opts()).unwrap();
    let d = 1e-3;
    let v = flux_integral(&f, d, &opts()).unwrap();
    assert!(((v - zero) / d / slope - 1.0).abs() <= 1e-5, "{v} {slope}");
}

#[test]
fn flux_is_bilinear() {
    let f = bump(0.3, 1.7, 1.0);
    let g = kinked(|x: f64| 3.0 * bump(0.3, 1.7, 1.0).eval(x), &[0.3, 1.7]);
    let (a, b) = (a_delta_split(&f, 0.05, &opts()).unwrap(), a_delta_split(&g, 0.05, &opts()).unwrap());
    let scale = 9.0 * a.0.abs().max(a.1.abs());
    assert!((b.0 - 9.0 * a.0).abs() <= 1e-10 * scale, "{a:?} {b:?}");
    assert!((b.1 - 9.0 * a.1).abs() <= 1e-10 * scale, "{a:?} {b:?}");
}

#[test]
fn ladder_validation() {
    let f = bump(0.3, 1.7, 1.0);
    assert!(flux_ladder(&f, &[1e-2, 1e-3], &opts()).is_err());
    assert!(flux_ladder(&f, &[1e-2, 1e-3, 2e-4], &opts()).is_err());
    assert!(flux_ladder(&f, &[1e-2, 1e-1, 1.0], &opts()).is_err());
}

#[test]
fn richardson_removes_a_power() {
    let vals: Vec<f64> = LADDER.iter().map(|d| 2.0 + 0.3 * d.powf(0.5)).collect();
    let (lim, order) = richardson(&vals, 10.0);
    assert!((lim - 2.0).abs() <= 1e-12);
    assert!((order - 0.5).abs() <= 1e-9);
}

/// Measured limits for `F = λφ/X`: `A⁽¹⁾ → λ²π²/6`, `A⁽²⁾ → −λ²π²/3`, total `−λ²π²/6`.
#[test]
fn cutoff_spectrum_flux_limits() {
    let phi = CutoffProfile::new(4.0, BaseProfile::Quintic).unwrap();
    let k = PI * PI / 6.0;
    let one = flux_ladder(&cutoff_spectrum(&phi, 1.0), &LADDER, &opts()).unwrap();
    assert!((one.a1 / k - 1.0).abs() <= 1e-2, "A1 {}", one.a1);
    assert!((one.a2 / (-2.0 * k) - 1.0).abs() <= 1e-2, "A2 {}", one.a2);
    assert!((one.total() / -k - 1.0).abs() <= 1e-2, "total {}", one.total());
    let two = flux_ladder(&cutoff_spectrum(&phi, 2.0), &LADDER, &opts()).unwrap();
    assert!((two.total() / one.total() - 4.0).abs() <= 0.08);
}

#[test]
fn sharp_cutoff_has_the_same_limit() {
    let f = kinked(|x: f64| if x < 1.0 { 1.0 / x } else { 0.0 }, &[1.0]);
    let rep = flux_ladder(&f, &LADDER, &opts()).unwrap();
    assert!((rep.total() / (-PI * PI / 6.0) - 1.0).abs() <= 1e-2, "total {}", rep.total());
}
