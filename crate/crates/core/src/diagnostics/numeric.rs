//! Deterministic tail diagnostics on tabulated or closed-form survivals.

use serde::{Deserialize, Serialize};

use super::curve::{check_grid, RatioPoint, RatioVerdict, Verdict};
use crate::{Error, Result};

/// Minimum table length for the numeric convolution.
pub const MIN_TABLE: usize = 1000;

/// Survival values `F̄(t_i)` of a law on `[0, ∞)` at increasing `t_i > 0`.
/// Below `t_0` the survival is interpolated linearly from `F̄(0) = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalTable {
    t: Vec<f64>,
    s: Vec<f64>,
}

impl SurvivalTable {
    pub fn new(t: Vec<f64>, s: Vec<f64>) -> Result<Self> {
        if t.len() != s.len() || t.len() < 2 {
            return Err(Error::param("survival table needs matching grids of length >= 2"));
        }
        if t[0] <= 0.0 || t.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::param("table grid must be positive and strictly increasing"));
        }
        if s.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::param("survival values must lie in [0, 1]"));
        }
        if let Some(i) = s.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::param(format!("survival table is not monotone at t = {}", t[i + 1])));
        }
        Ok(Self { t, s })
    }

    /// Tabulates `f` on `n` geometric points from `t0` to `t_max`.
    pub fn geometric<F: Fn(f64) -> f64>(f: F, t0: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t0 > 0.0 && t_max > t0) || n < 2 {
            return Err(Error::param("geometric table needs 0 < t0 < t_max and n >= 2"));
        }
        let r = (t_max / t0).ln() / (n - 1) as f64;
        let t: Vec<f64> = (0..n).map(|i| if i == n - 1 { t_max } else { t0 * (r * i as f64).exp() }).collect();
        let s = t.iter().map(|&x| f(x)).collect();
        Self::new(t, s)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn grid(&self) -> &[f64] {
        &self.t
    }

    /// Every other point, keeping both ends.
    pub fn coarsened(&self) -> SurvivalTable {
        let n = self.t.len();
        let idx: Vec<usize> = (0..n).step_by(2).chain(if (n - 1) % 2 == 1 { Some(n - 1) } else { None }).collect();
        SurvivalTable { t: idx.iter().map(|&i| self.t[i]).collect(), s: idx.iter().map(|&i| self.s[i]).collect() }
    }

    /// Interpolated survival, log-log between positive neighbours.
    pub fn survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        let t = &self.t;
        let s = &self.s;
        if x < t[0] {
            return 1.0 + (s[0] - 1.0) * x / t[0];
        }
        if x >= t[t.len() - 1] {
            return s[s.len() - 1];
        }
        let i = t.partition_point(|&v| v <= x) - 1;
        let (t0, t1, s0, s1) = (t[i], t[i + 1], s[i], s[i + 1]);
        if s0 > 0.0 && s1 > 0.0 {
            let w = (x / t0).ln() / (t1 / t0).ln();
            (s0.ln() + w * (s1.ln() - s0.ln())).exp()
        } else {
            s0 + (s1 - s0) * (x - t0) / (t1 - t0)
        }
    }

    /// `F̄*²(t) = F̄(t) + ∫₀ᵗ F̄(t − s) dF(s)`, evaluated in the equivalent
    /// symmetric form `F̄(t/2)² + 2 ∫_{[0, t/2]} F̄(t − s) dF(s)` so that the
    /// integrand never needs resolving near `t − s ≈ 0`. The Stieltjes
    /// integral is a midpoint sum over the cell `[0, t_0]`, the grid cells
    /// below `t/2` and a final partial cell.
    pub fn convolution_survival(&self, t: f64) -> f64 {
        let half = 0.5 * t;
        let sh = self.survival(half);
        let mut acc = 0.0;
        let mut a = 0.0;
        let mut sa = 1.0;
        for &b in self.t.iter().take_while(|&&b| b < half).chain(std::iter::once(&half)) {
            let sb = self.survival(b);
            acc += (sa - sb) * self.survival(t - 0.5 * (a + b));
            a = b;
            sa = sb;
        }
        sh * sh + 2.0 * acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericPoint {
    pub t: f64,
    pub ratio: f64,
    /// `|ratio − ratio on the coarsened grid|`.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NumericConvolution {
    pub points: Vec<NumericPoint>,
    pub verdict: RatioVerdict,
}

impl NumericConvolution {
    /// Ratio at the evaluation point nearest to `t`.
    pub fn ratio_at(&self, t: f64) -> Option<&NumericPoint> {
        self.points.iter().min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
    }
}

/// `F̄*²(t) / F̄(t)` at the table points (or at `at` when given), target 2.
/// Points with `F̄(t) = 0` produce `NaN` and an inconclusive verdict.
pub fn convolution_ratio_numeric(table: &SurvivalTable, at: Option<&[f64]>, tol: f64) -> Result<NumericConvolution> {
    if table.len() < MIN_TABLE {
        return Err(Error::param(format!("numeric convolution needs at least {MIN_TABLE} table points")));
    }
    let coarse = table.coarsened();
    let ts: Vec<f64> = at.map(<[f64]>::to_vec).unwrap_or_else(|| table.grid().to_vec());
    let points: Vec<NumericPoint> = ts
        .iter()
        .map(|&t| {
            let denom = table.survival(t);
            if denom <= 0.0 {
                return NumericPoint { t, ratio: f64::NAN, error: f64::NAN };
            }
            let fine = table.convolution_survival(t) / denom;
            let rough = coarse.convolution_survival(t) / coarse.survival(t);
            NumericPoint { t, ratio: fine, error: (fine - rough).abs() }
        })
        .collect();
    let rp: Vec<RatioPoint> = points
        .iter()
        .map(|p| RatioPoint { u: p.t, ratio: p.ratio, lo: p.ratio - p.error, hi: p.ratio + p.error })
        .collect();
    Ok(NumericConvolution { verdict: RatioVerdict::judge(2.0, rp, &[], tol), points })
}

fn exact_points<F: Fn(f64) -> f64>(grid: &[f64], f: F) -> Vec<RatioPoint> {
    grid.iter()
        .map(|&x| {
            let r = f(x);
            RatioPoint { u: x, ratio: r, lo: r, hi: r }
        })
        .collect()
}

/// `F̄(x + y) / F̄(x)` on the grid, target 1, judged within `tol`.
pub fn long_tail_test<F: Fn(f64) -> f64>(survival: F, y: f64, grid: &[f64], tol: f64) -> Result<RatioVerdict> {
    check_grid(grid)?;
    let pts = exact_points(grid, |x| {
        let d = survival(x);
        if d > 0.0 {
            survival(x + y) / d
        } else {
            f64::NAN
        }
    });
    Ok(RatioVerdict::judge(1.0, pts, &[], tol))
}

/// `F̄(2x) / F̄(x)` on the grid. The target reports the infimum over the grid;
/// a strictly decreasing tail of ratios that loses at least 10% over the
/// last three points is judged inconsistent with dominated variation.
pub fn dominated_variation_test<F: Fn(f64) -> f64>(survival: F, grid: &[f64]) -> Result<RatioVerdict> {
    check_grid(grid)?;
    let pts = exact_points(grid, |x| {
        let d = survival(x);
        if d > 0.0 {
            survival(2.0 * x) / d
        } else {
            f64::NAN
        }
    });
    let inf = pts.iter().map(|p| p.ratio).fold(f64::INFINITY, f64::min);
    let k = pts.len();
    let verdict = if k < 3 || pts.iter().any(|p| p.ratio.is_nan()) {
        Verdict::Inconclusive
    } else {
        let r = [pts[k - 3].ratio, pts[k - 2].ratio, pts[k - 1].ratio];
        let decaying = r[0] > r[1] && r[1] > r[2] && r[2] <= 0.9 * r[0];
        if decaying || inf <= 0.0 {
            Verdict::Inconsistent
        } else {
            Verdict::Consistent
        }
    };
    Ok(RatioVerdict { target: inf, points: pts, verdict })
}
