//! Real functions on the half-line `(0, ∞)` as seen by the operators.
//!
//! A profile is anything that can be evaluated pointwise. Profiles built from
//! grid samples carry their interpolant and closures; analytic profiles are
//! plain closures, optionally annotated with the points where they are not
//! smooth so that quadrature can split there.

pub trait Profile: Sync {
    fn eval(&self, x: f64) -> f64;

    /// Points of reduced smoothness (support edges, sampling span ends).
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

impl<F: Fn(f64) -> f64 + Sync> Profile for F {
    fn eval(&self, x: f64) -> f64 {
        self(x)
    }
}

/// A closure together with its breakpoints.
pub struct Kinked<F> {
    pub f: F,
    pub breaks: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> Profile for Kinked<F> {
    fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

pub fn kinked<F: Fn(f64) -> f64 + Sync>(f: F, breaks: &[f64]) -> Kinked<F> {
    Kinked { f, breaks: breaks.to_vec() }
}

/// C² bump `amp·(4(y−a)(b−y)/(b−a)²)³` on `(a, b)`, zero elsewhere.
pub fn bump(a: f64, b: f64, amp: f64) -> Kinked<impl Fn(f64) -> f64 + Sync + Clone> {
    let w2 = (b - a) * (b - a);
    let f = move |y: f64| {
        if y > a && y < b {
            amp * (4.0 * (y - a) * (b - y) / w2).powi(3)
        } else {
            0.0
        }
    };
    Kinked { f, breaks: vec![a, b] }
}

/// `x ↦ x·p(x)`, used to pass from `F` to `V`.
pub struct TimesX<'a, P: ?Sized>(pub &'a P);

impl<P: Profile + ?Sized> Profile for TimesX<'_, P> {
    fn eval(&self, x: f64) -> f64 {
        x * self.0.eval(x)
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
}

/// `x ↦ p(x)/x`, used to pass from `V` to `F`.
pub struct OverX<'a, P: ?Sized>(pub &'a P);

impl<P: Profile + ?Sized> Profile for OverX<'_, P> {
    fn eval(&self, x: f64) -> f64 {
        self.0.eval(x) / x
    }
    fn breakpoints(&self) -> Vec<f64> {
        self.0.breakpoints()
    }
}

/// Linear combination `a·p + b·q`.
pub struct Combo<'a, P: ?Sized, Q: ?Sized> {
    pub a: f64,
    pub p: &'a P,
    pub b: f64,
    pub q: &'a Q,
}

impl<P: Profile + ?Sized, Q: Profile + ?Sized> Profile for Combo<'_, P, Q> {
    fn eval(&self, x: f64) -> f64 {
        let u = if self.a == 0.0 { 0.0 } else { self.a * self.p.eval(x) };
        let v = if self.b == 0.0 { 0.0 } else { self.b * self.q.eval(x) };
        u + v
    }
    fn breakpoints(&self) -> Vec<f64> {
        let mut b = self.p.breakpoints();
        b.extend(self.q.breakpoints());
        b
    }
}

/// Monotone piecewise-cubic Hermite interpolant (Fritsch-Carlson slopes).
#[derive(Clone, Debug)]
pub struct Pchip {
    t: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl Pchip {
    /// `t` strictly increasing, at least two points.
    pub fn new(t: Vec<f64>, y: Vec<f64>) -> Self {
        assert!(t.len() >= 2 && t.len() == y.len());
        let n = t.len();
        let h: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
        } else {
            for i in 1..n - 1 {
                if del[i - 1] * del[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
                }
            }
            d[0] = end_slope(h[0], h[1], del[0], del[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
        }
        Pchip { t, y, d }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        let i = match self.t.binary_search_by(|v| v.total_cmp(&x)) {
            Ok(i) => return self.y[i],
            Err(0) => 0,
            Err(i) if i >= n => n - 2,
            Err(i) => i - 1,
        };
        let h = self.t[i + 1] - self.t[i];
        let s = (x - self.t[i]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        // increment form: flat segments return y[i] exactly
        self.y[i] + h01 * (self.y[i + 1] - self.y[i]) + h * (h10 * self.d[i] + h11 * self.d[i + 1])
    }
}

fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}
