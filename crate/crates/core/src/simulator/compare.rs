use serde::{Deserialize, Serialize};

use super::config::RiskConfig;
use super::engine::{simulate_ruin_grid, RuinEstimate};
use crate::asymptotics::{h_curve_mc, h_curve_quadrature, mrv_asymptote, mrv_ruin_constant};
use crate::diagnostics::{Method, TailCurve};
use crate::rng::RngStream;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub u: f64,
    pub psi_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    #[serde(rename = "H")]
    pub h: f64,
    pub h_stderr: f64,
    pub ratio: f64,
    pub ratio_lo: f64,
    pub ratio_hi: f64,
    pub truncated_frac: f64,
    pub mean_steps: f64,
    /// Regular-variation asymptote when the claim model provides one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mrv: Option<f64>,
}

/// Simulated ruin probabilities next to the asymptote `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub h_method: Method,
    pub rows: Vec<ComparisonRow>,
    pub estimates: Vec<RuinEstimate>,
    /// Number of the last three grid steps along which `|ratio − 1|` shrinks.
    pub steps_toward_one: usize,
}

impl Comparison {
    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
        w.write_record(["u", "psi_hat", "ci_lo", "ci_hi", "H", "ratio", "truncated_frac", "mean_steps"])
            .expect("in-memory");
        for r in &self.rows {
            w.write_record(
                [r.u, r.psi_hat, r.ci_lo, r.ci_hi, r.h, r.ratio, r.truncated_frac, r.mean_steps].map(|v| v.to_string()),
            )
            .expect("in-memory");
        }
        String::from_utf8(w.into_inner().expect("in-memory")).expect("ascii")
    }
}

/// Monte Carlo draws for `H` per simulated path when `H` has no quadrature.
/// A path costs hundreds of claim draws, a sojourn sample costs one.
pub const H_MC_FACTOR: u64 = 100;

/// Computes `H` on the grid, by quadrature when the model and set allow it
/// and by Monte Carlo (on `stream.split(1)`) otherwise.
pub fn asymptote_curve(cfg: &RiskConfig, levels: &[f64], n_mc: u64, stream: RngStream) -> Result<TailCurve> {
    let c = cfg.drift();
    if let Some(f) = cfg.ruin_set.family() {
        match h_curve_quadrature(&cfg.claims, f, c, levels) {
            Ok(curve) => return Ok(curve),
            Err(Error::Unsupported(_)) => {}
            Err(e) => return Err(e),
        }
    }
    h_curve_mc(&cfg.claims, &cfg.ruin_set, c, levels, n_mc, stream.split(1))
}

/// Runs the coupled simulation on `stream.split(0)` and sets it against the
/// asymptote. `h` may be supplied to reuse a precomputed curve on the same grid.
pub fn ruin_vs_asymptote(
    cfg: &RiskConfig,
    levels: &[f64],
    n_paths: u64,
    stream: RngStream,
    h: Option<TailCurve>,
) -> Result<Comparison> {
    let h = match h {
        Some(curve) => {
            if curve.levels() != levels {
                return Err(Error::param("asymptote curve grid differs from the simulation grid"));
            }
            curve
        }
        None => {
            let n_mc = if cfg.ruin_set.family().is_some() { n_paths.saturating_mul(H_MC_FACTOR) } else { n_paths };
            asymptote_curve(cfg, levels, n_mc, stream)?
        }
    };
    let estimates = simulate_ruin_grid(cfg, levels, n_paths, stream.split(0))?;
    let mrv = match (cfg.claims.mrv(), cfg.ruin_set.family()) {
        (Some(m), Some(f)) => mrv_ruin_constant(&m, f, cfg.drift()).ok().map(|k| (m, k)),
        _ => None,
    };
    let rows: Vec<ComparisonRow> = estimates
        .iter()
        .zip(&h.points)
        .map(|(e, p)| {
            let hv = p.estimate;
            // ψ̂ interval divided by the ends of the Ĥ interval.
            let rel_h = if hv > 0.0 { p.stderr / hv } else { f64::INFINITY };
            ComparisonRow {
                u: e.u,
                psi_hat: e.estimate,
                ci_lo: e.ci_lo,
                ci_hi: e.ci_hi,
                h: hv,
                h_stderr: p.stderr,
                ratio: e.estimate / hv,
                ratio_lo: e.ci_lo / hv / (1.0 + 1.96 * rel_h),
                ratio_hi: e.ci_hi / hv / (1.0 - 1.96 * rel_h).max(f64::MIN_POSITIVE),
                truncated_frac: e.truncated_fraction(),
                mean_steps: e.mean_steps,
                mrv: mrv.as_ref().map(|(m, k)| mrv_asymptote(m, k, e.u)),
            }
        })
        .collect();
    let steps_toward_one = rows
        .windows(2)
        .rev()
        .take(3)
        .filter(|w| (w[1].ratio - 1.0).abs() < (w[0].ratio - 1.0).abs())
        .count();
    Ok(Comparison { h_method: h.method, rows, estimates, steps_toward_one })
}
