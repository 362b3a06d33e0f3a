use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};
use statrs::function::gamma::gamma;

use crate::quad::{self, TailRate};
use crate::{Error, Result};

/// A law on `[0, ∞)` with closed-form or quadrature survival.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum OneDimLaw {
    /// Survival `(x / scale)^(-alpha)` for `x ≥ scale`.
    Pareto { alpha: f64, scale: f64 },
    /// Survival `exp(-(x / scale)^shape)`; subexponential for `shape < 1`.
    Weibull { shape: f64, scale: f64 },
    /// `exp(N(mu, sigma²))`.
    Lognormal { mu: f64, sigma: f64 },
    Exponential { rate: f64 },
    PointMass { at: f64 },
    /// Stationary-excess law `F_I` of a finite-mean base law.
    IntegratedTail { base: Box<OneDimLaw> },
}

const INT_TAIL_RTOL: f64 = 1e-8;

impl OneDimLaw {
    pub fn pareto(alpha: f64, scale: f64) -> Self {
        OneDimLaw::Pareto { alpha, scale }
    }

    pub fn exponential(rate: f64) -> Self {
        OneDimLaw::Exponential { rate }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, msg: &str| if c { Ok(()) } else { Err(Error::param(msg)) };
        match self {
            OneDimLaw::Pareto { alpha, scale } => {
                ok(*alpha > 0.0 && alpha.is_finite(), "pareto alpha must be positive")?;
                ok(*scale > 0.0 && scale.is_finite(), "pareto scale must be positive")
            }
            OneDimLaw::Weibull { shape, scale } => {
                ok(*shape > 0.0 && shape.is_finite(), "weibull shape must be positive")?;
                ok(*scale > 0.0 && scale.is_finite(), "weibull scale must be positive")
            }
            OneDimLaw::Lognormal { mu, sigma } => {
                ok(mu.is_finite(), "lognormal mu must be finite")?;
                ok(*sigma > 0.0 && sigma.is_finite(), "lognormal sigma must be positive")
            }
            OneDimLaw::Exponential { rate } => ok(*rate > 0.0 && rate.is_finite(), "exponential rate must be positive"),
            OneDimLaw::PointMass { at } => ok(*at >= 0.0 && at.is_finite(), "point mass must sit on [0, inf)"),
            OneDimLaw::IntegratedTail { base } => {
                base.validate()?;
                base.mean().map(|_| ())
            }
        }
    }

    /// `P(X > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            OneDimLaw::Pareto { alpha, scale } => {
                if t < *scale {
                    1.0
                } else {
                    (t / scale).powf(-alpha)
                }
            }
            OneDimLaw::Weibull { shape, scale } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-(t / scale).powf(*shape)).exp()
                }
            }
            OneDimLaw::Lognormal { mu, sigma } => {
                if t <= 0.0 {
                    1.0
                } else {
                    0.5 * erfc((t.ln() - mu) / (sigma * std::f64::consts::SQRT_2))
                }
            }
            OneDimLaw::Exponential { rate } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-rate * t).exp()
                }
            }
            OneDimLaw::PointMass { at } => {
                if t < *at {
                    1.0
                } else {
                    0.0
                }
            }
            OneDimLaw::IntegratedTail { base } => integrated_survival(base, t),
        }
    }

    pub fn cdf(&self, t: f64) -> f64 {
        1.0 - self.survival(t)
    }

    /// Generalized inverse `inf{ x : F(x) ≥ q }`.
    pub fn quantile(&self, q: f64) -> f64 {
        let q = q.clamp(0.0, 1.0);
        match self {
            OneDimLaw::Pareto { alpha, scale } => scale * (1.0 - q).powf(-1.0 / alpha),
            OneDimLaw::Weibull { shape, scale } => scale * (-(-q).ln_1p()).powf(1.0 / shape),
            OneDimLaw::Lognormal { mu, sigma } => {
                if q <= 0.0 {
                    0.0
                } else {
                    (mu - sigma * std::f64::consts::SQRT_2 * erfc_inv(2.0 * q)).exp()
                }
            }
            OneDimLaw::Exponential { rate } => -(-q).ln_1p() / rate,
            OneDimLaw::PointMass { at } => {
                if q <= 0.0 {
                    0.0
                } else {
                    *at
                }
            }
            OneDimLaw::IntegratedTail { base } => integrated_quantile(base, q),
        }
    }

    /// Draw by inversion of an open-interval uniform.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            OneDimLaw::PointMass { at } => *at,
            OneDimLaw::Pareto { alpha, scale } => {
                // 1 − U ∈ (0, 1] keeps the draw finite.
                let v = 1.0 - rng.random::<f64>();
                scale * v.powf(-1.0 / alpha)
            }
            OneDimLaw::Exponential { rate } => -(1.0 - rng.random::<f64>()).ln() / rate,
            _ => {
                let q: f64 = rng.random();
                self.quantile(q)
            }
        }
    }

    /// Lower edge of the support.
    pub fn support_min(&self) -> f64 {
        match self {
            OneDimLaw::Pareto { scale, .. } => *scale,
            OneDimLaw::PointMass { at } => *at,
            _ => 0.0,
        }
    }

    pub fn mean(&self) -> Result<f64> {
        self.moment(1)
    }

    /// `E[X^k]` for `k ∈ {1, 2}`.
    pub fn moment(&self, k: u32) -> Result<f64> {
        let kf = k as f64;
        let inf = |what: &str| Err(Error::InfiniteMean(what.to_string()));
        match self {
            OneDimLaw::Pareto { alpha, scale } => {
                if *alpha <= kf {
                    return inf(&format!("pareto moment {k} needs alpha > {k}"));
                }
                Ok(alpha * scale.powi(k as i32) / (alpha - kf))
            }
            OneDimLaw::Weibull { shape, scale } => Ok(scale.powi(k as i32) * gamma(1.0 + kf / shape)),
            OneDimLaw::Lognormal { mu, sigma } => Ok((kf * mu + 0.5 * kf * kf * sigma * sigma).exp()),
            OneDimLaw::Exponential { rate } => Ok(gamma(1.0 + kf) / rate.powi(k as i32)),
            OneDimLaw::PointMass { at } => Ok(at.powi(k as i32)),
            OneDimLaw::IntegratedTail { base } => {
                // E[X_I^k] = E[X^(k+1)] / ((k+1) E[X]).
                let m = base.mean()?;
                Ok(base.moment(k + 1)? / ((kf + 1.0) * m))
            }
        }
    }

    /// Tail index `α` when the survival is regularly varying with index `-α`.
    pub fn tail_index(&self) -> Option<f64> {
        match self {
            OneDimLaw::Pareto { alpha, .. } => Some(*alpha),
            OneDimLaw::IntegratedTail { base } => base.tail_index().map(|a| a - 1.0),
            _ => None,
        }
    }

    /// Integrated-tail law `F_I`; closed form for exponential laws.
    pub fn integrated_tail(&self) -> Result<OneDimLaw> {
        self.validate()?;
        self.mean()?;
        match self {
            OneDimLaw::Exponential { rate } => Ok(OneDimLaw::Exponential { rate: *rate }),
            _ => Ok(OneDimLaw::IntegratedTail { base: Box::new(self.clone()) }),
        }
    }
}

fn integrated_survival(base: &OneDimLaw, t: f64) -> f64 {
    let t = t.max(0.0);
    match base {
        OneDimLaw::Pareto { alpha, scale } => {
            let mu = alpha * scale / (alpha - 1.0);
            if t <= *scale {
                1.0 - t / mu
            } else {
                (scale / t).powf(alpha - 1.0) / alpha
            }
        }
        OneDimLaw::Exponential { rate } => (-rate * t).exp(),
        OneDimLaw::PointMass { at } => {
            if t < *at {
                1.0 - t / at
            } else {
                0.0
            }
        }
        _ => {
            let Ok(mu) = base.mean() else { return f64::NAN };
            let width = base.quantile(0.5).max(1e-3);
            let rate = base.tail_index().map(TailRate::Known).unwrap_or(TailRate::Fitted);
            match quad::integrate_to_infinity(|y| base.survival(y), t, width, INT_TAIL_RTOL, rate) {
                Ok(q) => (q.value / mu).clamp(0.0, 1.0),
                Err(_) => f64::NAN,
            }
        }
    }
}

fn integrated_quantile(base: &OneDimLaw, q: f64) -> f64 {
    if q <= 0.0 {
        return 0.0;
    }
    if let OneDimLaw::Pareto { alpha, scale } = base {
        let mu = alpha * scale / (alpha - 1.0);
        let s = 1.0 - q;
        return if s >= 1.0 / alpha {
            mu * q
        } else {
            scale * (alpha * s).powf(-1.0 / (alpha - 1.0))
        };
    }
    // Bracket then bisect on the survival.
    let target = 1.0 - q;
    let mut hi = base.quantile(0.5).max(1e-6);
    while integrated_survival(base, hi) > target {
        hi *= 2.0;
        if !hi.is_finite() {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if integrated_survival(base, mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    hi
}
