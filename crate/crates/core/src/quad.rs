//! Adaptive Gauss–Kronrod quadrature on finite and semi-infinite ranges.
//!
//! Finite intervals use the 7-point Gauss / 15-point Kronrod pair with
//! global bisection of the panel carrying the largest error estimate.
//! Semi-infinite integrals walk geometrically growing panels, each resolved
//! relative to the integral accumulated so far, until the
//! integrand falls below `1e-12` of its observed peak, then close the
//! remainder with an algebraic extrapolation `f(x) x / (β - 1)`, which is
//! exact for `f(x) = C x^(-β)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_PANELS: usize = 4000;
const CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Total integral including any extrapolated tail.
    pub value: f64,
    /// Estimated absolute error of the resolved part.
    pub error: f64,
    /// Contribution of the algebraic tail extrapolation (zero on finite ranges).
    pub tail: f64,
}

/// How the remainder beyond the last resolved panel is closed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRate {
    /// Estimate the local power from `f(x)` and `f(x/2)`.
    Fitted,
    /// The integrand decays like `x^(-β)` with the given `β > 1`.
    Known(f64),
}

/// A subinterval ordered by its error estimate.
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// (integral, error estimate, max |f| on nodes)
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut peak = fc.abs();
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        peak = peak.max(f1.abs()).max(f2.abs());
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs(), peak)
}

/// Adaptive integral of `f` over `[a, b]` to `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Quadrature {
    let (q, _) = integrate_peak(&f, a, b, rel_tol, abs_tol);
    q
}

fn integrate_peak<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> (Quadrature, f64) {
    if a == b {
        return (Quadrature { value: 0.0, error: 0.0, tail: 0.0 }, 0.0);
    }
    let (v, e, p) = gk15(f, a, b);
    let mut panels = BinaryHeap::from([Panel { a, b, value: v, error: e }]);
    let mut total = v;
    let mut err = e;
    let mut peak = p;
    while err > abs_tol.max(rel_tol * total.abs()) && panels.len() < MAX_PANELS {
        let worst = panels.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            panels.push(worst);
            break;
        }
        let (v1, e1, p1) = gk15(f, worst.a, mid);
        let (v2, e2, p2) = gk15(f, mid, worst.b);
        peak = peak.max(p1).max(p2);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        panels.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        panels.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
    }
    // Re-sum to shed accumulated cancellation from the running updates.
    let value: f64 = panels.iter().map(|p| p.value).sum();
    let error: f64 = panels.iter().map(|p| p.error).sum();
    (Quadrature { value, error, tail: 0.0 }, peak)
}

/// Integral of `f` over `[a, ∞)`. `scale` sets the first panel width.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    scale: f64,
    rel_tol: f64,
    rate: TailRate,
) -> Result<Quadrature> {
    if !(scale > 0.0) {
        return Err(Error::param("quadrature scale must be positive"));
    }
    let mut lo = a;
    let mut width = scale;
    let mut value = 0.0f64;
    let mut error = 0.0;
    let mut peak = 0.0f64;
    for _ in 0..400 {
        let hi = lo + width;
        let (q, p) = integrate_peak(&f, lo, hi, rel_tol * 0.1, rel_tol * 0.1 * value.abs());
        value += q.value;
        error += q.error;
        peak = peak.max(p);
        let fe = f(hi).abs();
        lo = hi;
        width *= 2.0;
        if peak == 0.0 {
            continue;
        }
        if fe <= CUTOFF * peak {
            let tail = extrapolate(&f, lo, a, rate)?;
            return Ok(Quadrature { value: value + tail, error, tail });
        }
    }
    Err(Error::Numerical("integrand did not decay over 400 geometric panels".into()))
}

fn extrapolate<F: Fn(f64) -> f64>(f: &F, x: f64, origin: f64, rate: TailRate) -> Result<f64> {
    let fx = f(x);
    if fx == 0.0 {
        return Ok(0.0);
    }
    let beta = match rate {
        TailRate::Known(b) => b,
        TailRate::Fitted => {
            let half = origin + 0.5 * (x - origin);
            let fh = f(half);
            if fh <= 0.0 || fx <= 0.0 {
                return Ok(0.0);
            }
            (fh / fx).ln() / ((x - origin) / (half - origin)).ln()
        }
    };
    if !(beta > 1.0) {
        return Err(Error::Numerical(format!("tail decays like x^-{beta}, not integrable")));
    }
    Ok(fx * (x - origin) / (beta - 1.0))
}
