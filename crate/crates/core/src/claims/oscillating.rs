//! Bivariate law with joint survival
//! `(1 + γ sin(ln s) cos φ) / s`, `s = 1 + x + y`, `φ = (π/2)(x − y)/s`.
//!
//! The mixed partial derivative gives the density
//!
//! ```text
//! f(x, y) s³ = 2 + γ [ a(φ) sin(ln s) + b(φ) cos(ln s) ]
//! a(φ) = cos φ (1 + π²/4 − φ²) − 4 φ sin φ
//! b(φ) = 2 φ sin φ − 3 cos φ
//! ```
//!
//! so `2 − |γ| q* ≤ f s³ ≤ 2 + |γ| q*` with `q* = max_φ √(a² + b²) ≈ 7.0248`
//! over `|φ| ≤ π/2`. Positivity therefore needs `|γ| < 2/q* ≈ 0.2847`.

use rand::Rng;
use std::f64::consts::FRAC_PI_2;
use std::sync::OnceLock;

use crate::{Error, Result};

fn ab(phi: f64) -> (f64, f64) {
    let (s, c) = phi.sin_cos();
    let a = c * (1.0 + FRAC_PI_2 * FRAC_PI_2 - phi * phi) - 4.0 * phi * s;
    let b = 2.0 * phi * s - 3.0 * c;
    (a, b)
}

/// `max_{|φ| ≤ π/2} √(a(φ)² + b(φ)²)`, by a dense grid refined with
/// golden-section search around the best node.
pub fn amplitude_bound() -> f64 {
    static Q: OnceLock<f64> = OnceLock::new();
    *Q.get_or_init(|| {
        let amp = |p: f64| {
            let (a, b) = ab(p);
            (a * a + b * b).sqrt()
        };
        let n = 20_000;
        let h = 2.0 * FRAC_PI_2 / n as f64;
        let (mut best, mut arg) = (0.0, 0.0);
        for i in 0..=n {
            let p = -FRAC_PI_2 + i as f64 * h;
            let v = amp(p);
            if v > best {
                best = v;
                arg = p;
            }
        }
        let (mut lo, mut hi) = ((arg - h).max(-FRAC_PI_2), (arg + h).min(FRAC_PI_2));
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..100 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if amp(m1) < amp(m2) {
                lo = m1;
            } else {
                hi = m2;
            }
        }
        best.max(amp(0.5 * (lo + hi)))
    })
}

/// Bounds `(lo, hi)` of `f(x, y) (1 + x + y)³` for admissible `γ`.
pub fn density_bounds(gamma: f64) -> Result<(f64, f64)> {
    let o = Oscillating::new(gamma)?;
    Ok((o.lower(), o.upper))
}

/// Largest `|γ|` keeping the density positive.
pub fn gamma_limit() -> f64 {
    2.0 / amplitude_bound()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Oscillating {
    pub gamma: f64,
    /// Upper bound of `f s³`.
    pub upper: f64,
}

impl Oscillating {
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma != 0.0 && gamma.abs() <= 0.5) {
            return Err(Error::param("oscillating model needs 0 < |gamma| <= 1/2"));
        }
        let q = amplitude_bound();
        if 2.0 - gamma.abs() * q <= 0.0 {
            return Err(Error::param(format!(
                "oscillating model density is not positive for |gamma| >= {:.6}",
                gamma_limit()
            )));
        }
        Ok(Self { gamma, upper: 2.0 + gamma.abs() * q })
    }

    pub fn lower(&self) -> f64 {
        4.0 - self.upper
    }

    pub fn survival(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x.max(0.0), y.max(0.0));
        let s = 1.0 + x + y;
        let phi = FRAC_PI_2 * (x - y) / s;
        (1.0 + self.gamma * s.ln().sin() * phi.cos()) / s
    }

    pub fn density(&self, x: f64, y: f64) -> f64 {
        if x < 0.0 || y < 0.0 {
            return 0.0;
        }
        let s = 1.0 + x + y;
        self.density_scaled(x, y) / (s * s * s)
    }

    /// `f(x, y) (1 + x + y)³`.
    fn density_scaled(&self, x: f64, y: f64) -> f64 {
        let s = 1.0 + x + y;
        let phi = FRAC_PI_2 * (x - y) / s;
        let (a, b) = ab(phi);
        let (sl, cl) = s.ln().sin_cos();
        2.0 + self.gamma * (a * sl + b * cl)
    }

    /// Rejection from the proposal `2 / (1 + x + y)³`, whose total `t = x + y`
    /// has CDF `(t / (1 + t))²`; given `t`, `x` is uniform on `[0, t]`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) -> u64 {
        let mut tries = 0;
        loop {
            tries += 1;
            let r = rng.random::<f64>().sqrt();
            let t = r / (1.0 - r);
            let x = rng.random::<f64>() * t;
            let y = t - x;
            if rng.random::<f64>() * self.upper < self.density_scaled(x, y) {
                out[0] = x;
                out[1] = y;
                return tries;
            }
        }
    }

    /// Acceptance probability of the rejection step.
    pub fn acceptance_rate(&self) -> f64 {
        2.0 / self.upper
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn amplitude_value() {
        let q = amplitude_bound();
        assert!((q - 7.0248).abs() < 1e-3, "{q}");
        assert!((gamma_limit() - 0.2847).abs() < 1e-3);
    }

    #[test]
    fn density_matches_mixed_difference() {
        let m = Oscillating::new(0.2).unwrap();
        let mut rng = RngStream::new(11, 0).rng();
        for _ in 0..1000 {
            let x = rng.random::<f64>() * 50.0 + 0.01;
            let y = rng.random::<f64>() * 50.0 + 0.01;
            let h = 1e-3 * (1.0 + x + y);
            let fd = (m.survival(x + h, y + h) - m.survival(x + h, y - h) - m.survival(x - h, y + h)
                + m.survival(x - h, y - h))
                / (4.0 * h * h);
            let f = m.density(x, y);
            assert!(((fd - f) / f).abs() < 1e-4, "({x},{y}): {fd} vs {f}");
        }
    }

    #[test]
    fn density_within_bounds_on_grid() {
        let m = Oscillating::new(0.28).unwrap();
        for i in 0..300 {
            for j in 0..300 {
                let (x, y) = ((i as f64 * 0.05).exp() - 1.0, (j as f64 * 0.05).exp() - 1.0);
                let v = m.density_scaled(x, y);
                assert!(v >= m.lower() - 1e-12 && v <= m.upper + 1e-12);
                assert!(v > 0.0);
            }
        }
    }

    #[test]
    fn gamma_range() {
        assert!(Oscillating::new(0.0).is_err());
        assert!(Oscillating::new(0.3).is_err());
        assert!(Oscillating::new(-0.25).is_ok());
        assert!(Oscillating::new(0.6).is_err());
    }

    #[test]
    fn survival_at_origin_and_marginal_tail() {
        let m = Oscillating::new(0.05).unwrap();
        assert_eq!(m.survival(0.0, 0.0), 1.0);
        let x = 1e3;
        let v = x * m.survival(x, 0.0);
        assert!((1.0 - 0.05..=1.0 + 0.05).contains(&v), "{v}");
    }
}
