use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RiskConfig;
use crate::claims::OneDimLaw;
use crate::rng::RngStream;
use crate::ruinsets::ScaleIndex;
use crate::stats::wilson;
use crate::{Error, Result};

/// How a simulated path ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathEnd {
    /// Crossed the highest requested level.
    Ruined,
    /// Abandoned at the give-up distance.
    GaveUp,
    /// Abandoned, then resolved by the ladder-height continuation.
    Continued,
    /// Hit the step cap.
    Capped,
}

/// Outcome of one path: the largest value of `max_k p_kᵀS_n` seen (over
/// `n ≥ 1`) together with how and when the path ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathOutcome {
    pub peak: f64,
    pub steps: u64,
    pub end: PathEnd,
}

/// Crude Monte Carlo estimate of `ψ(u)`.
///
/// Paths that end without crossing `u` and without an exact continuation are
/// counted as survivors, so `estimate` is a lower bound whose bias is at most
/// `truncated_paths / n_paths`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuinEstimate {
    pub u: f64,
    pub n_paths: u64,
    pub ruin_count: u64,
    pub estimate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub truncated_paths: u64,
    pub continued_paths: u64,
    pub mean_steps: f64,
}

impl RuinEstimate {
    pub fn truncated_fraction(&self) -> f64 {
        self.truncated_paths as f64 / self.n_paths as f64
    }
}

/// Z-value of the reported Wilson intervals.
pub const CI_Z: f64 = 1.96;

/// Simulates one path with its own stream and stops once the walk crosses
/// `u_max`, drifts below the give-up distance or reaches the step cap.
pub fn simulate_path(cfg: &RiskConfig, u_max: f64, stream: RngStream) -> Result<PathOutcome> {
    let mut sampler = cfg.claims.sampler()?;
    let ladder = if cfg.continuation { Some(cfg.ladder()?) } else { None };
    let inter = cfg.interarrival.sampler();
    Ok(walk(cfg, u_max, stream, &mut sampler, &inter, ladder.as_ref()))
}

fn walk(
    cfg: &RiskConfig,
    u_max: f64,
    stream: RngStream,
    sampler: &mut crate::claims::Sampler<'_>,
    inter: &super::config::InterarrivalSampler,
    ladder: Option<&(f64, OneDimLaw)>,
) -> PathOutcome {
    let d = cfg.dim();
    let mut rng = stream.rng();
    let mut s = vec![0.0; d];
    let mut x = vec![0.0; d];
    let mut peak = f64::NEG_INFINITY;
    let mut steps = 0u64;
    loop {
        sampler.draw(&mut rng, &mut x);
        let y = inter.draw(&mut rng);
        for ((sj, xj), pj) in s.iter_mut().zip(&x).zip(&cfg.premium) {
            *sj += xj - y * pj;
        }
        steps += 1;
        let proj = cfg.ruin_set.projection(&s);
        if proj > peak {
            peak = proj;
        }
        if proj > u_max {
            return PathOutcome { peak, steps, end: PathEnd::Ruined };
        }
        if proj <= -cfg.give_up {
            if let Some((rho, fi)) = ladder {
                // The remaining supremum of the walk started at S is S + M,
                // M a geometric sum of integrated-tail ladder heights.
                let mut m = 0.0;
                while rand::Rng::random::<f64>(&mut rng) < *rho {
                    m += fi.sample(&mut rng);
                }
                let tail = cfg.ruin_set.projection(&[s[0] + m]);
                return PathOutcome { peak: peak.max(tail), steps, end: PathEnd::Continued };
            }
            return PathOutcome { peak, steps, end: PathEnd::GaveUp };
        }
        if steps >= cfg.max_steps {
            return PathOutcome { peak, steps, end: PathEnd::Capped };
        }
    }
}

/// Simulates `n_paths` paths; path `i` draws from `stream.split(i)`, so the
/// outcome of each path is independent of scheduling and of the grid.
pub fn simulate_paths(cfg: &RiskConfig, u_max: f64, n_paths: u64, stream: RngStream) -> Result<Vec<PathOutcome>> {
    if n_paths == 0 {
        return Err(Error::param("n_paths must be positive"));
    }
    if !(u_max >= 0.0) || !u_max.is_finite() {
        return Err(Error::param("levels must be nonnegative and finite"));
    }
    let ladder = if cfg.continuation { Some(cfg.ladder()?) } else { None };
    cfg.claims.sampler()?;
    let inter = cfg.interarrival.sampler();
    Ok((0..n_paths)
        .into_par_iter()
        .map_init(
            || cfg.claims.sampler().expect("checked above"),
            |sampler, i| walk(cfg, u_max, stream.split(i), sampler, &inter, ladder.as_ref()),
        )
        .collect())
}

/// Summarizes path outcomes at level `u ≤ u_max`.
pub fn estimate_at(paths: &[PathOutcome], u: f64) -> RuinEstimate {
    let n = paths.len() as u64;
    let mut ruined = 0u64;
    let mut truncated = 0u64;
    let mut continued = 0u64;
    let mut steps = 0u128;
    for p in paths {
        steps += p.steps as u128;
        if p.end == PathEnd::Continued {
            continued += 1;
        }
        if p.peak > u {
            ruined += 1;
        } else if matches!(p.end, PathEnd::GaveUp | PathEnd::Capped) {
            truncated += 1;
        }
    }
    let (ci_lo, ci_hi) = wilson(ruined, n, CI_Z);
    RuinEstimate {
        u,
        n_paths: n,
        ruin_count: ruined,
        estimate: ruined as f64 / n as f64,
        ci_lo,
        ci_hi,
        truncated_paths: truncated,
        continued_paths: continued,
        mean_steps: steps as f64 / n as f64,
    }
}

/// Estimates `ψ(u)` at one level.
pub fn simulate_ruin(cfg: &RiskConfig, u: f64, n_paths: u64, stream: RngStream) -> Result<RuinEstimate> {
    let paths = simulate_paths(cfg, u, n_paths, stream)?;
    Ok(estimate_at(&paths, u))
}

/// Estimates `ψ` on an increasing grid from one set of coupled paths, so the
/// estimates are nonincreasing in `u` by construction.
pub fn simulate_ruin_grid(cfg: &RiskConfig, levels: &[f64], n_paths: u64, stream: RngStream) -> Result<Vec<RuinEstimate>> {
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("levels must be nonempty and strictly increasing"));
    }
    let u_max = *levels.last().expect("nonempty");
    let paths = simulate_paths(cfg, u_max, n_paths, stream)?;
    Ok(levels.iter().map(|&u| estimate_at(&paths, u)).collect())
}
