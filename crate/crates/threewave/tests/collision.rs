use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use threewave::collision::{q_n, qn_lipschitz_gap, qn_phi, qtilde, qtilde_grid, qtilde_q, TailModel};
use threewave::grid::{make_log_grid, BaseProfile, CutoffProfile, GridFunction};
use threewave::profile::{bump, kinked, Profile};
use threewave::quad::QuadOpts;
use threewave::Error;

fn opts() -> QuadOpts {
    QuadOpts::default()
}

#[test]
fn rayleigh_jeans_on_grid_nodes() {
    let g = make_log_grid(1e-3, 50.0, 40).unwrap();
    for c in [0.5, 1.0, 2.0] {
        let f = GridFunction::from_fn(&g, |x| c / x).unwrap();
        let q = qtilde_grid(&f, &TailModel::new(c, 0.0).unwrap(), &opts()).unwrap();
        let worst = q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst <= 1e-10, "c={c}: {worst}");
    }
}

#[test]
fn bilinear_in_amplitude() {
    let f = bump(0.7, 2.4, 0.8);
    let f3 = kinked(|y: f64| 3.0 * bump(0.7, 2.4, 0.8).eval(y), &[0.7, 2.4]);
    for x in [0.5, 1.0, 1.9, 3.0] {
        let a = qtilde(&f, x, &opts()).unwrap();
        let b = qtilde(&f3, x, &opts()).unwrap();
        assert!((b - 9.0 * a).abs() <= 1e-12 * (9.0 * a).abs(), "X={x}: {b} vs {}", 9.0 * a);
    }
}

#[test]
fn bose_einstein_is_quantum_equilibrium() {
    let be = |y: f64| 1.0 / y.exp_m1();
    for k in 0..=20 {
        let x = 0.1 * 100f64.powf(k as f64 / 20.0);
        let v = qtilde_q(&be, x, &opts()).unwrap();
        assert!(v.abs() <= 1e-6, "X={x}: {v}");
    }
}

#[test]
fn zero_spectrum() {
    let z = |_y: f64| 0.0;
    for x in [1e-3, 1.0, 30.0] {
        assert_eq!(qtilde(&z, x, &opts()).unwrap(), 0.0);
        assert_eq!(q_n(&z, x, &opts()).unwrap(), 0.0);
    }
}

#[test]
fn q_n_consistency_on_random_bumps() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = make_log_grid(1e-2, 8.0, 24).unwrap();
    for _ in 0..3 {
        let a = rng.gen_range(0.1..1.0);
        let b = a + rng.gen_range(0.3..2.0);
        let amp = rng.gen_range(0.1..2.0);
        let g = bump(a, b, amp);
        let f = kinked(move |y: f64| bump(a, b, amp).eval(y) / y, &[a, b]);
        for &x in grid.nodes() {
            let lhs = q_n(&g, x, &opts()).unwrap();
            let rhs = x * qtilde(&f, x, &opts()).unwrap();
            let scale = rhs.abs().max(1e-10);
            assert!((lhs - rhs).abs() <= 1e-8 * scale, "({a:.3},{b:.3}) X={x}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn origin_growth_is_rejected() {
    assert!(matches!(q_n(&|y: f64| y.powf(-0.2), 0.5, &opts()), Err(Error::OriginDivergence(_))));
    assert!(q_n(&|y: f64| y.powf(0.3) * (-y).exp(), 0.5, &opts()).is_ok());
}

#[test]
fn tail_model_rules() {
    assert!(TailModel::new(1.0, -0.5).is_err());
    let t = TailModel::new(2.0, 1.0).unwrap();
    // ∫_4^∞ 2 Y^{-2} Y^{1/2} dY = 2·4^{-1/2}/(1/2)
    assert!((t.moment_tail(4.0, 0.5).unwrap() - 2.0).abs() < 1e-15);
    assert!(matches!(t.moment_tail(4.0, 1.5), Err(Error::TailDivergence(_))));
    assert_eq!(TailModel::none().moment_tail(4.0, 3.0).unwrap(), 0.0);
}

#[test]
fn near_origin_scaling_is_grid_stable() {
    // g supported in [1, 2], normalized in X_{−r, r+q}
    let (r, q) = (0.25, 1.0);
    let raw = bump(1.0, 2.0, 1.0);
    let norm = (0..2001)
        .map(|k| 1.0 + k as f64 / 2000.0)
        .map(|x| x.powf(-r) * (1.0 + x).powf(r + q) * raw.eval(x))
        .fold(0.0f64, f64::max);
    let g = bump(1.0, 2.0, 1.0 / norm);
    let sup = |n: usize| {
        let grid = make_log_grid(1e-4, 1e-1, n).unwrap();
        grid.nodes()
            .iter()
            .map(|&x| q_n(&g, x, &opts()).unwrap().abs() * x.powf(0.5 - r))
            .fold(0.0f64, f64::max)
    };
    let (a, b) = (sup(16), sup(31));
    assert!(a.is_finite() && a > 0.0);
    assert!((a / b - 1.0).abs() <= 0.2, "{a} {b}");
    // shape over a decade: |Q_N(g)| X^{1/2−r} does not blow up as X decreases
    let lo = q_n(&g, 1e-4, &opts()).unwrap().abs() * 1e-4f64.powf(0.5 - r);
    let hi = q_n(&g, 1e-3, &opts()).unwrap().abs() * 1e-3f64.powf(0.5 - r);
    assert!(lo <= hi);
}

#[test]
fn qn_phi_vanishes_beyond_twice_r() {
    let p = CutoffProfile::new(4.0, BaseProfile::Quintic).unwrap();
    for x in [8.0 + 1e-9, 12.0, 100.0] {
        assert_eq!(qn_phi(&p, x, &opts()).unwrap(), 0.0);
    }
    assert!(qn_phi(&p, 7.9, &opts()).unwrap() != 0.0);
}

#[test]
fn qn_phi_band_bound_is_finite() {
    let p = CutoffProfile::new(4.0, BaseProfile::Quintic).unwrap();
    let grid = make_log_grid(2.0, 8.0, 40).unwrap();
    let c = grid.nodes().iter().map(|&x| qn_phi(&p, x, &opts()).unwrap().abs() * x.sqrt()).fold(0.0f64, f64::max);
    assert!(c.is_finite() && c > 0.0);
}

/// Measured small-X limit: `Q_N(φ)(X)/√X → 2·C(φ)`, not `C(φ)`.
#[test]
fn qn_phi_small_x_limit_is_twice_c_phi() {
    for (r, base) in [(4.0, BaseProfile::Quintic), (10.0, BaseProfile::Septic)] {
        let p = CutoffProfile::new(r, base).unwrap();
        let c = p.c_phi();
        assert!(c < 0.0);
        for x in [1e-4 * r, 1e-3 * r, 1e-2 * r] {
            let ratio = qn_phi(&p, x, &opts()).unwrap() / (x.sqrt() * c);
            assert!((ratio - 2.0).abs() <= 0.02, "R={r} X={x}: ratio {ratio}");
        }
    }
}

#[test]
fn lipschitz_gap_under_doubling_and_epsilon() {
    let (r, q) = (0.25, 1.0);
    let g = bump(0.5, 2.0, 1.0);
    let g2 = kinked(|y: f64| 2.0 * bump(0.5, 2.0, 1.0).eval(y), &[0.5, 2.0]);
    let gap = |n: usize| qn_lipschitz_gap(&make_log_grid(1e-3, 10.0, n).unwrap(), &g, &g2, r, q, &opts()).unwrap();
    let (a, b) = (gap(96), gap(191));
    assert!(a.is_finite() && (a / b - 1.0).abs() <= 0.1, "{a} {b}");

    let grid = make_log_grid(1e-3, 10.0, 32).unwrap();
    let eps_gap = |eps: f64| {
        let h = kinked(move |y: f64| bump(0.5, 2.0, 1.0).eval(y) + eps * bump(1.0, 3.0, 1.0).eval(y), &[0.5, 1.0, 2.0, 3.0]);
        qn_lipschitz_gap(&grid, &g, &h, r, q, &opts()).unwrap()
    };
    let (e2, e3) = (eps_gap(1e-2), eps_gap(1e-3));
    assert!((e2 / e3 - 1.0).abs() <= 0.2, "{e2} {e3}");
}
