use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::asymptotics::SafetyLoading;
use crate::claims::{ClaimModel, OneDimLaw};
use crate::ruinsets::{BidAskSpec, HyperplaneFamily, RuinSet, RuinSetDescriptor, ScaleIndex};
use crate::{Error, Result};

/// Law of the times between claims.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case", deny_unknown_fields)]
pub enum Interarrival {
    Exponential { rate: f64 },
    Deterministic { delta: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl Interarrival {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Interarrival::Exponential { rate } => *rate > 0.0 && rate.is_finite(),
            Interarrival::Deterministic { delta } => *delta > 0.0 && delta.is_finite(),
            Interarrival::Gamma { shape, scale } => *shape > 0.0 && *scale > 0.0 && shape.is_finite() && scale.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::param("interarrival parameters must be positive and finite"))
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Interarrival::Exponential { rate } => 1.0 / rate,
            Interarrival::Deterministic { delta } => *delta,
            Interarrival::Gamma { shape, scale } => shape * scale,
        }
    }

    pub(crate) fn sampler(&self) -> InterarrivalSampler {
        match self {
            Interarrival::Exponential { rate } => InterarrivalSampler::Exp(*rate),
            Interarrival::Deterministic { delta } => InterarrivalSampler::Fixed(*delta),
            Interarrival::Gamma { shape, scale } => InterarrivalSampler::Gamma(Gamma::new(*shape, *scale).expect("validated")),
        }
    }
}

pub(crate) enum InterarrivalSampler {
    Exp(f64),
    Fixed(f64),
    Gamma(Gamma<f64>),
}

impl InterarrivalSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            InterarrivalSampler::Exp(rate) => -(1.0 - rng.random::<f64>()).ln() / rate,
            InterarrivalSampler::Fixed(d) => *d,
            InterarrivalSampler::Gamma(g) => g.sample(rng),
        }
    }
}

/// How ruin is defined relative to the reserve `R_t = u b + p t − Σ X`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Solvency {
    /// Ruin when some line's reserve is negative: `A = { x : x_j > b_j for some j }`.
    Coordinatewise,
    /// Ruin when the total reserve is negative: `A = { x : Σ x_j > Σ b_j }`.
    Aggregate,
    /// Ruin when the reserve leaves the bid-ask solvency cone.
    Bidask { pi: Vec<Vec<f64>> },
    /// Ruin set given directly.
    Explicit { ruin_set: RuinSetDescriptor },
}

impl Solvency {
    pub fn build(&self, b: &[f64]) -> Result<RuinSet> {
        match self {
            Solvency::Coordinatewise => Ok(HyperplaneFamily::union(b)?.into()),
            Solvency::Aggregate => {
                let s: f64 = b.iter().sum();
                Ok(HyperplaneFamily::aggregate(&vec![1.0 / s; b.len()])?.into())
            }
            Solvency::Bidask { pi } => RuinSet::from_bidask(BidAskSpec::new(pi.clone(), b.to_vec())?),
            Solvency::Explicit { ruin_set } => ruin_set.build(),
        }
    }
}

/// Multiple of `max_k p_kᵀc` used as the default give-up distance.
pub const GIVE_UP_FACTOR: f64 = 1000.0;

/// Default cap on claims per path.
pub const DEFAULT_MAX_STEPS: u64 = 10_000_000;

/// A validated renewal risk model.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskConfig {
    pub claims: ClaimModel,
    pub interarrival: Interarrival,
    pub premium: Vec<f64>,
    pub allocation: Vec<f64>,
    pub ruin_set: RuinSet,
    /// Safety loading `c = E[Y] p − E[X]`.
    pub loading: SafetyLoading,
    /// A path is abandoned once `max_k p_kᵀS ≤ −give_up`.
    pub give_up: f64,
    pub max_steps: u64,
    /// Resolve abandoned paths exactly through the ladder-height
    /// representation of the remaining maximum (one-dimensional models
    /// with exponential interarrivals only).
    pub continuation: bool,
}

/// Optional horizon settings; `None` selects the defaults.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    #[serde(default)]
    pub give_up: Option<f64>,
    #[serde(default)]
    pub max_steps: Option<u64>,
    #[serde(default)]
    pub continuation: bool,
}

impl RiskConfig {
    pub fn new(
        claims: ClaimModel,
        interarrival: Interarrival,
        premium: Vec<f64>,
        allocation: Vec<f64>,
        solvency: &Solvency,
        horizon: Horizon,
    ) -> Result<Self> {
        claims.validate()?;
        interarrival.validate()?;
        let d = claims.dim();
        crate::error::check_dim(d, premium.len())?;
        crate::error::check_dim(d, allocation.len())?;
        if premium.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::param("premium rates must be positive"));
        }
        if allocation.iter().any(|&b| !(b > 0.0)) || (allocation.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::param("allocation b must be positive and sum to 1"));
        }
        let ruin_set = solvency.build(&allocation)?;
        crate::error::check_dim(d, ruin_set.dim())?;
        let mean = claims.mean()?;
        let loading = SafetyLoading::from_means(&mean, interarrival.mean(), &premium)?;
        let reach = ruin_set.projection(&loading.c);
        if !(reach > 0.0) {
            return Err(Error::Degenerate("drift does not move away from the ruin set".into()));
        }
        let give_up = horizon.give_up.unwrap_or(GIVE_UP_FACTOR * reach);
        if !(give_up > 0.0) || !give_up.is_finite() {
            return Err(Error::param("give-up distance must be positive"));
        }
        let max_steps = horizon.max_steps.unwrap_or(DEFAULT_MAX_STEPS);
        if max_steps == 0 {
            return Err(Error::param("max_steps must be positive"));
        }
        let cfg = Self {
            claims,
            interarrival,
            premium,
            allocation,
            ruin_set,
            loading,
            give_up,
            max_steps,
            continuation: horizon.continuation,
        };
        if cfg.continuation {
            cfg.ladder()?;
        }
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        self.claims.dim()
    }

    pub fn drift(&self) -> &[f64] {
        &self.loading.c
    }

    /// Ladder data `(ρ, F_I)` for the exact continuation.
    pub(crate) fn ladder(&self) -> Result<(f64, OneDimLaw)> {
        let law = match (&self.claims, &self.interarrival) {
            (ClaimModel::Independent { marginals }, Interarrival::Exponential { .. }) if marginals.len() == 1 => {
                marginals[0].clone()
            }
            _ => {
                return Err(Error::Unsupported(
                    "exact continuation needs one-dimensional claims with exponential interarrivals".into(),
                ))
            }
        };
        let rho = law.mean()? / (self.interarrival.mean() * self.premium[0]);
        Ok((rho, law.integrated_tail()?))
    }
}
