use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dyadic;
use super::oscillating::Oscillating;
use super::{AngularMeasure, OneDimLaw};
use crate::asymptotics::MrvDescriptor;
use crate::rng::RngStream;
use crate::ruinsets::HyperplaneFamily;
use crate::{Error, Result};

/// A law on `[0, ∞)^d` with a sampler and whichever analytic facets exist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimModel {
    /// Independent coordinates.
    Independent { marginals: Vec<OneDimLaw> },
    /// `X = W a_θ θ` with `θ ~ ν`, `W ~ radial` and `a_θ = Σ s_j θ_j`
    /// (constant 1 when `radial_scale` is absent).
    Polar {
        angular: AngularMeasure,
        radial: OneDimLaw,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        radial_scale: Option<Vec<f64>>,
    },
    /// Uniform mass on the dyadic simplices `{x + y = 2ⁿ}`.
    DyadicSimplex,
    /// Oscillating joint survival with parameter `gamma`.
    Oscillating {
        #[serde(default = "default_gamma")]
        gamma: f64,
    },
    Deterministic { value: Vec<f64> },
}

fn default_gamma() -> f64 {
    0.05
}

impl ClaimModel {
    pub fn independent(marginals: Vec<OneDimLaw>) -> Result<Self> {
        let m = ClaimModel::Independent { marginals };
        m.validate()?;
        Ok(m)
    }

    pub fn polar(angular: AngularMeasure, radial: OneDimLaw, radial_scale: Option<Vec<f64>>) -> Result<Self> {
        let m = ClaimModel::Polar { angular, radial, radial_scale };
        m.validate()?;
        Ok(m)
    }

    pub fn oscillating(gamma: f64) -> Result<Self> {
        let m = ClaimModel::Oscillating { gamma };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClaimModel::Independent { marginals } => {
                if marginals.is_empty() {
                    return Err(Error::param("independent model needs at least one marginal"));
                }
                marginals.iter().try_for_each(OneDimLaw::validate)
            }
            ClaimModel::Polar { angular, radial, radial_scale } => {
                angular.validate()?;
                radial.validate()?;
                if let Some(s) = radial_scale {
                    if s.len() != angular.dim() {
                        return Err(Error::DimensionMismatch { expected: angular.dim(), got: s.len() });
                    }
                    if s.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
                        return Err(Error::param("radial scale must be bounded and positive"));
                    }
                }
                Ok(())
            }
            ClaimModel::DyadicSimplex => Ok(()),
            ClaimModel::Oscillating { gamma } => Oscillating::new(*gamma).map(|_| ()),
            ClaimModel::Deterministic { value } => {
                if value.is_empty() || value.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
                    Err(Error::param("deterministic claim must be a finite nonnegative vector"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ClaimModel::Independent { marginals } => marginals.len(),
            ClaimModel::Polar { angular, .. } => angular.dim(),
            ClaimModel::DyadicSimplex | ClaimModel::Oscillating { .. } => 2,
            ClaimModel::Deterministic { value } => value.len(),
        }
    }

    /// Prepared sampler; validation and constant set-up happen once here.
    pub fn sampler(&self) -> Result<Sampler<'_>> {
        self.validate()?;
        let osc = match self {
            ClaimModel::Oscillating { gamma } => Some(Oscillating::new(*gamma)?),
            _ => None,
        };
        Ok(Sampler { model: self, osc, theta: vec![0.0; self.dim()] })
    }

    /// `n` i.i.d. draws from `stream`.
    pub fn sample(&self, stream: RngStream, n: usize) -> Result<Vec<Vec<f64>>> {
        let mut s = self.sampler()?;
        let mut rng = stream.rng();
        Ok((0..n)
            .map(|_| {
                let mut x = vec![0.0; self.dim()];
                s.draw(&mut rng, &mut x);
                x
            })
            .collect())
    }

    /// Mean vector; an error for infinite-mean models.
    pub fn mean(&self) -> Result<Vec<f64>> {
        match self {
            ClaimModel::Independent { marginals } => marginals.iter().map(OneDimLaw::mean).collect(),
            ClaimModel::Polar { angular, radial, radial_scale } => {
                let w = radial.mean()?;
                let d = angular.dim();
                Ok(match radial_scale {
                    None => angular.mean().into_iter().map(|m| w * m).collect(),
                    Some(s) => {
                        let sm = angular.second_moments();
                        (0..d).map(|j| w * (0..d).map(|k| s[k] * sm[k][j]).sum::<f64>()).collect()
                    }
                })
            }
            ClaimModel::DyadicSimplex => Err(Error::InfiniteMean("dyadic simplex claims have infinite mean".into())),
            ClaimModel::Oscillating { .. } => {
                Err(Error::InfiniteMean("oscillating claims have marginal tails of order 1/x".into()))
            }
            ClaimModel::Deterministic { value } => Ok(value.clone()),
        }
    }

    /// `P(X_j > t)` when available in closed form.
    pub fn marginal_survival(&self, j: usize, t: f64) -> Option<f64> {
        if j >= self.dim() {
            return None;
        }
        match self {
            ClaimModel::Independent { marginals } => Some(marginals[j].survival(t)),
            ClaimModel::Polar { angular, radial, radial_scale } => {
                let atoms = angular.atom_list()?;
                let m = angular.total_mass();
                Some(
                    atoms
                        .iter()
                        .map(|a| {
                            let amp = a_theta(radial_scale, &a.theta) * a.theta[j];
                            let p = if amp > 0.0 { radial.survival(t / amp) } else { (t < 0.0) as u8 as f64 };
                            a.weight / m * p
                        })
                        .sum(),
                )
            }
            ClaimModel::DyadicSimplex => Some(if t < 0.0 { 1.0 } else { dyadic::crnonlin_survival(t).ok()? }),
            ClaimModel::Oscillating { gamma } => {
                let o = Oscillating::new(*gamma).ok()?;
                Some(if j == 0 { o.survival(t, 0.0) } else { o.survival(0.0, t) })
            }
            ClaimModel::Deterministic { value } => Some((value[j] > t) as u8 as f64),
        }
    }

    /// Joint upper-orthant survival `P(X > x)` when available.
    pub fn joint_survival(&self, x: &[f64]) -> Option<f64> {
        if x.len() != self.dim() {
            return None;
        }
        match self {
            ClaimModel::Independent { marginals } => Some(marginals.iter().zip(x).map(|(m, &t)| m.survival(t)).product()),
            ClaimModel::Polar { angular, radial, radial_scale } => {
                let atoms = angular.atom_list()?;
                let m = angular.total_mass();
                Some(
                    atoms
                        .iter()
                        .map(|a| {
                            let at = a_theta(radial_scale, &a.theta);
                            // Need W a_θ θ_j > x_j for every j.
                            let mut need = 0.0f64;
                            for (&th, &xj) in a.theta.iter().zip(x) {
                                if th > 0.0 {
                                    need = need.max(xj / (at * th));
                                } else if xj >= 0.0 {
                                    return 0.0;
                                }
                            }
                            a.weight / m * radial.survival(need)
                        })
                        .sum(),
                )
            }
            ClaimModel::DyadicSimplex => Some(dyadic::joint_survival(x[0], x[1])),
            ClaimModel::Oscillating { gamma } => Some(Oscillating::new(*gamma).ok()?.survival(x[0], x[1])),
            ClaimModel::Deterministic { value } => Some(value.iter().zip(x).all(|(v, t)| v > t) as u8 as f64),
        }
    }

    /// Scalarized survival `F̄_A(t) = P(Y(X) > t)` when available exactly.
    pub fn scalar_survival(&self, family: &HyperplaneFamily, t: f64) -> Option<f64> {
        if family.dim() != self.dim() {
            return None;
        }
        match self {
            ClaimModel::Independent { marginals } => {
                let w = axis_weights(family)?;
                // 1 − Π(1 − F̄_j), evaluated without cancellation.
                let log_keep: f64 = marginals
                    .iter()
                    .zip(&w)
                    .filter(|(_, &wj)| wj > 0.0)
                    .map(|(m, &wj)| (-m.survival(t / wj)).ln_1p())
                    .sum();
                Some(-log_keep.exp_m1())
            }
            ClaimModel::Polar { angular, radial, radial_scale } => {
                let atoms = angular.atom_list()?;
                let m = angular.total_mass();
                Some(
                    atoms
                        .iter()
                        .map(|a| {
                            let y = family.index_of(&a.theta) * a_theta(radial_scale, &a.theta);
                            let p = if y > 0.0 { radial.survival(t / y) } else { (t < 0.0) as u8 as f64 };
                            a.weight / m * p
                        })
                        .sum(),
                )
            }
            ClaimModel::DyadicSimplex => Some(dyadic::scalar_survival(family, t)),
            ClaimModel::Deterministic { value } => Some((family.index_of(value) > t) as u8 as f64),
            ClaimModel::Oscillating { .. } => None,
        }
    }

    /// Joint density where it is known in closed form.
    pub fn density(&self, x: &[f64]) -> Option<f64> {
        match self {
            ClaimModel::Oscillating { gamma } if x.len() == 2 => Some(Oscillating::new(*gamma).ok()?.density(x[0], x[1])),
            _ => None,
        }
    }

    /// Standard multivariate regular variation data for polar models with a
    /// Pareto radius and constant radial scale.
    pub fn mrv(&self) -> Option<MrvDescriptor> {
        match self {
            ClaimModel::Polar { angular, radial: OneDimLaw::Pareto { alpha, scale }, radial_scale: None } => {
                Some(MrvDescriptor {
                    alpha: *alpha,
                    angular: angular.normalized(),
                    norm_law: OneDimLaw::Pareto { alpha: *alpha, scale: *scale },
                })
            }
            _ => None,
        }
    }

    /// Whether all coordinates are independent with closed-form marginals.
    pub fn independent_marginals(&self) -> Option<&[OneDimLaw]> {
        match self {
            ClaimModel::Independent { marginals } => Some(marginals),
            _ => None,
        }
    }
}

fn a_theta(scale: &Option<Vec<f64>>, theta: &[f64]) -> f64 {
    match scale {
        None => 1.0,
        Some(s) => s.iter().zip(theta).map(|(a, b)| a * b).sum(),
    }
}

/// Per-axis weights when every direction is a positive multiple of a unit
/// vector; several directions on one axis reduce to the largest.
pub(crate) fn axis_weights(family: &HyperplaneFamily) -> Option<Vec<f64>> {
    let mut w = vec![0.0f64; family.dim()];
    for p in family.directions() {
        let mut nz = p.iter().enumerate().filter(|(_, &v)| v != 0.0);
        let (j, &v) = nz.next()?;
        if nz.next().is_some() {
            return None;
        }
        w[j] = w[j].max(v);
    }
    Some(w)
}

/// Sampler bound to a model, carrying per-model constants and scratch space.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    model: &'a ClaimModel,
    osc: Option<Oscillating>,
    theta: Vec<f64>,
}

impl Sampler<'_> {
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// Writes one draw into `out`.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        match self.model {
            ClaimModel::Independent { marginals } => {
                for (o, m) in out.iter_mut().zip(marginals) {
                    *o = m.sample(rng);
                }
            }
            ClaimModel::Polar { angular, radial, radial_scale } => {
                angular.sample_into(rng, &mut self.theta);
                let w = radial.sample(rng) * a_theta(radial_scale, &self.theta);
                for (o, t) in out.iter_mut().zip(&self.theta) {
                    *o = w * t;
                }
            }
            ClaimModel::DyadicSimplex => dyadic::sample(rng, out),
            ClaimModel::Oscillating { .. } => {
                self.osc.as_ref().expect("prepared").sample(rng, out);
            }
            ClaimModel::Deterministic { value } => out.copy_from_slice(value),
        }
    }

    /// Acceptance rate of the rejection step for oscillating models.
    pub fn acceptance_rate(&self) -> Option<f64> {
        self.osc.map(|o| o.acceptance_rate())
    }

    /// Draw that also reports the number of proposals used (1 for direct samplers).
    pub fn draw_counted<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) -> u64 {
        match (&self.osc, self.model) {
            (Some(o), ClaimModel::Oscillating { .. }) => o.sample(rng, out),
            _ => {
                self.draw(rng, out);
                1
            }
        }
    }
}
