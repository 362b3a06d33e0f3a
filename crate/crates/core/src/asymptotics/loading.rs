use serde::{Deserialize, Serialize};

use crate::claims::ClaimModel;
use crate::rng::RngStream;
use crate::stats::Moments;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    McEstimated { n: u64, stderr: Vec<f64> },
}

/// Mean drift per claim `c = E[Y] p − E[X]`, required to be positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SafetyLoading {
    pub c: Vec<f64>,
    pub provenance: Provenance,
}

impl SafetyLoading {
    pub fn analytic(c: Vec<f64>) -> Result<Self> {
        super::check_drift(&c).map_err(|_| Error::param(format!("safety loading {c:?} is not positive")))?;
        Ok(Self { c, provenance: Provenance::Analytic })
    }

    /// `c = E[Y] p − E[X]` from closed-form means.
    pub fn from_means(claim_mean: &[f64], interarrival_mean: f64, premium: &[f64]) -> Result<Self> {
        crate::error::check_dim(claim_mean.len(), premium.len())?;
        let c = premium.iter().zip(claim_mean).map(|(p, m)| interarrival_mean * p - m).collect();
        Self::analytic(c)
    }

    /// Estimates `E[X]` from `n` draws; rejects drifts within 3 standard
    /// errors of zero.
    pub fn estimate(model: &ClaimModel, interarrival_mean: f64, premium: &[f64], n: u64, stream: RngStream) -> Result<Self> {
        let d = model.dim();
        crate::error::check_dim(d, premium.len())?;
        let mut sampler = model.sampler()?;
        let mut rng = stream.rng();
        let mut acc = vec![Moments::default(); d];
        let mut x = vec![0.0; d];
        for _ in 0..n {
            sampler.draw(&mut rng, &mut x);
            for (m, &v) in acc.iter_mut().zip(&x) {
                m.push(v);
            }
        }
        let c: Vec<f64> = premium.iter().zip(&acc).map(|(p, m)| interarrival_mean * p - m.mean).collect();
        let stderr: Vec<f64> = acc.iter().map(Moments::stderr).collect();
        if c.iter().zip(&stderr).any(|(ci, se)| *ci <= 3.0 * se) {
            return Err(Error::param(format!("estimated safety loading {c:?} is not positive at 3 standard errors")));
        }
        Ok(Self { c, provenance: Provenance::McEstimated { n, stderr } })
    }
}
