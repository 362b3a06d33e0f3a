use serde::{Deserialize, Serialize};

use crate::claims::ClaimModel;
use crate::diagnostics::Method;
use crate::quad::{self, TailRate};
use crate::rng::RngStream;
use crate::stats::Moments;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub method: Method,
}

const RTOL: f64 = 1e-10;

/// `θ = E[min_j X_j / c_j] = ∫₀^∞ P(X > v c) dv` without sampling.
pub fn theta_normalizer(model: &ClaimModel, c: &[f64]) -> Result<Estimate> {
    super::check_drift(c)?;
    crate::error::check_dim(model.dim(), c.len())?;
    model.mean()?;
    match model {
        ClaimModel::Deterministic { value } => Ok(Estimate {
            value: value.iter().zip(c).map(|(x, cj)| x / cj).fold(f64::INFINITY, f64::min),
            stderr: 0.0,
            method: Method::ClosedForm,
        }),
        ClaimModel::Independent { marginals } => {
            let rate = marginals
                .iter()
                .map(|m| m.tail_index())
                .try_fold(0.0, |acc, a| a.map(|a| acc + a))
                .map(TailRate::Known)
                .unwrap_or(TailRate::Fitted);
            let scale = marginals.iter().zip(c).map(|(m, cj)| m.quantile(0.5) / cj).fold(f64::INFINITY, f64::min);
            let q = quad::integrate_to_infinity(
                |v| marginals.iter().zip(c).map(|(m, cj)| m.survival(v * cj)).product(),
                0.0,
                scale.max(1e-9),
                RTOL,
                rate,
            )?;
            Ok(Estimate { value: q.value, stderr: 0.0, method: Method::Quadrature })
        }
        ClaimModel::Polar { angular, radial, radial_scale } => {
            let atoms = angular
                .atom_list()
                .ok_or_else(|| Error::Unsupported("theta for continuous angular measures needs sampling".into()))?;
            let mass = angular.total_mass();
            let w = radial.mean()?;
            let v: f64 = atoms
                .iter()
                .map(|a| {
                    let at = radial_scale.as_ref().map(|s| s.iter().zip(&a.theta).map(|(x, y)| x * y).sum()).unwrap_or(1.0);
                    let mn = a.theta.iter().zip(c).map(|(t, cj)| at * t / cj).fold(f64::INFINITY, f64::min);
                    a.weight / mass * mn
                })
                .sum();
            Ok(Estimate { value: w * v, stderr: 0.0, method: Method::ClosedForm })
        }
        _ => Err(Error::Unsupported("theta needs a finite-mean model".into())),
    }
}

/// Sample-mean estimate of `θ` from `n` draws.
pub fn theta_normalizer_mc(model: &ClaimModel, c: &[f64], n: u64, stream: RngStream) -> Result<Estimate> {
    super::check_drift(c)?;
    crate::error::check_dim(model.dim(), c.len())?;
    model.mean()?;
    if n == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    let d = model.dim();
    let parts = crate::parallel::map_blocks(n, stream, |s, len| {
        let mut sampler = model.sampler().expect("validated");
        let mut rng = s.rng();
        let mut x = vec![0.0; d];
        let mut m = Moments::default();
        for _ in 0..len {
            sampler.draw(&mut rng, &mut x);
            m.push(x.iter().zip(c).map(|(a, b)| a / b).fold(f64::INFINITY, f64::min));
        }
        m
    });
    let m = parts.into_iter().fold(Moments::default(), Moments::merge);
    Ok(Estimate { value: m.mean, stderr: m.stderr(), method: Method::Mc })
}
