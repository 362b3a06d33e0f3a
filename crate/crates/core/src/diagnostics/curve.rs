use serde::{Deserialize, Serialize};
use std::fmt::Write;

use crate::{Error, Result};

/// How a curve value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mc,
    Quadrature,
    ClosedForm,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Mc => "mc",
            Method::Quadrature => "quadrature",
            Method::ClosedForm => "closed_form",
        }
    }
}

/// Per-point reliability marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointFlag {
    Ok,
    /// Fewer than [`MIN_HITS`] exceedances: the point cannot support a verdict.
    FewHits,
    /// A single sample carries more than 10% of the sum; the standard error
    /// comes from the median of means.
    HeavyTail,
}

/// Minimum exceedance count for a Monte Carlo point to be conclusive.
pub const MIN_HITS: u64 = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub level: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub flag: PointFlag,
    /// Exceedance count for survival estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hits: Option<u64>,
    /// Median-of-means companion estimate for heavy-tailed averages.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub median_of_means: Option<f64>,
    /// Part of a quadrature value coming from the algebraic tail extrapolation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail_part: Option<f64>,
}

impl CurvePoint {
    pub fn exact(level: f64, estimate: f64) -> Self {
        Self { level, estimate, stderr: 0.0, flag: PointFlag::Ok, hits: None, median_of_means: None, tail_part: None }
    }
}

/// Estimates on an increasing grid of levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCurve {
    pub method: Method,
    /// Sample size (0 for deterministic methods).
    pub n: u64,
    pub points: Vec<CurvePoint>,
}

impl TailCurve {
    pub fn levels(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.level).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.estimate).collect()
    }

    /// RFC 4180 CSV with columns `level,estimate,stderr,method,n`.
    pub fn to_csv(&self) -> String {
        self.csv_with(&["level", "estimate", "stderr", "method", "n"])
    }

    /// Same content under the header `u,H,stderr,method`.
    pub fn to_h_csv(&self) -> String {
        self.csv_with(&["u", "H", "stderr", "method"])
    }

    fn csv_with(&self, header: &[&str]) -> String {
        let mut s = header.join(",");
        s.push_str("\r\n");
        for p in &self.points {
            let _ = write!(s, "{},{},{},{}", p.level, p.estimate, p.stderr, self.method.as_str());
            if header.len() > 4 {
                let _ = write!(s, ",{}", self.n);
            }
            s.push_str("\r\n");
        }
        s
    }

    /// Pointwise transform of estimates and standard errors by a constant factor.
    pub fn scaled(&self, factor: f64) -> TailCurve {
        let mut c = self.clone();
        for p in &mut c.points {
            p.estimate *= factor;
            p.stderr *= factor.abs();
            p.median_of_means = p.median_of_means.map(|m| m * factor);
            p.tail_part = p.tail_part.map(|m| m * factor);
        }
        c
    }
}

pub(crate) fn check_grid(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::param("level grid is empty"));
    }
    if levels.iter().any(|&u| !(u > 0.0) || !u.is_finite()) {
        return Err(Error::param("levels must be positive and finite"));
    }
    if levels.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("levels must be strictly increasing"));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Consistent,
    Inconsistent,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub u: f64,
    pub ratio: f64,
    pub lo: f64,
    pub hi: f64,
}

/// A ratio curve judged against its asymptotic target over the tested range.
/// A verdict is a statement about that range only, never a proof.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioVerdict {
    pub target: f64,
    pub points: Vec<RatioPoint>,
    pub verdict: Verdict,
}

impl RatioVerdict {
    /// Judges the last three points: all covering the target (within `tol`)
    /// is consistent, none covering is inconsistent, anything else, missing
    /// values or points marked unreliable is inconclusive.
    pub fn judge(target: f64, points: Vec<RatioPoint>, reliable: &[bool], tol: f64) -> Self {
        let verdict = decide(target, &points, reliable, tol);
        Self { target, points, verdict }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }

    pub fn last(&self) -> Option<&RatioPoint> {
        self.points.last()
    }
}

fn decide(target: f64, points: &[RatioPoint], reliable: &[bool], tol: f64) -> Verdict {
    let k = points.len();
    if k < 3 || !target.is_finite() {
        return Verdict::Inconclusive;
    }
    let tail = &points[k - 3..];
    let rel = if reliable.len() == k { &reliable[k - 3..] } else { &[true, true, true][..] };
    if rel.iter().any(|r| !r) || tail.iter().any(|p| p.ratio.is_nan() || p.lo.is_nan() || p.hi.is_nan()) {
        return Verdict::Inconclusive;
    }
    let covered = tail.iter().filter(|p| p.lo - tol <= target && target <= p.hi + tol).count();
    match covered {
        3 => Verdict::Consistent,
        0 => Verdict::Inconsistent,
        _ => Verdict::Inconclusive,
    }
}
