//! Monte Carlo tail diagnostics on scalarized claims.
//!
//! Numerators and denominators of every ratio are drawn from independent
//! sub-streams (`split(1)` and `split(0)`), so their counts are independent
//! binomials and the log-ratio delta method applies. Identity cases (one
//! term, zero shift, `N ≡ 1`) are exactly 1 and are reported as such.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::curve::{check_grid, CurvePoint, Method, PointFlag, RatioPoint, RatioVerdict, TailCurve, MIN_HITS};
use crate::claims::ClaimModel;
use crate::error::check_dim;
use crate::parallel::{bucket, exceedances, map_blocks, merge_hist};
use crate::rng::RngStream;
use crate::ruinsets::ScaleIndex;
use crate::stats::{binomial_stderr, ratio_ci, z_for_level};
use crate::{Error, Result};

const CONFIDENCE: f64 = 0.95;

fn prepare<S: ScaleIndex>(model: &ClaimModel, set: &S, levels: &[f64], n: u64) -> Result<()> {
    check_grid(levels)?;
    check_dim(model.dim(), set.dim())?;
    model.validate()?;
    if n == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    Ok(())
}

/// Exceedance counts of `stat(sampler, rng, buf)` over the levels.
fn count_exceedances<S, F>(model: &ClaimModel, set: &S, levels: &[f64], n: u64, stream: RngStream, stat: F) -> Vec<u64>
where
    S: ScaleIndex,
    F: Fn(&mut crate::claims::Sampler<'_>, &mut crate::rng::StreamRng, &S, &mut [f64], &mut [f64]) -> f64 + Sync + Send,
{
    let d = model.dim();
    let hists = map_blocks(n, stream, |s, len| {
        let mut sampler = model.sampler().expect("validated");
        let mut rng = s.rng();
        let mut x = vec![0.0; d];
        let mut acc = vec![0.0; d];
        let mut hist = vec![0u64; levels.len() + 1];
        for _ in 0..len {
            let y = stat(&mut sampler, &mut rng, set, &mut x, &mut acc);
            hist[bucket(levels, y)] += 1;
        }
        hist
    });
    exceedances(&hists.into_iter().reduce(merge_hist).expect("n > 0"))
}

fn single<S: ScaleIndex>(
    sampler: &mut crate::claims::Sampler<'_>,
    rng: &mut crate::rng::StreamRng,
    set: &S,
    x: &mut [f64],
    _acc: &mut [f64],
) -> f64 {
    sampler.draw(rng, x);
    set.index(x)
}

/// `F̂_A(u) = #{Y(X_i) > u} / n` on every level from one pass over the sample.
pub fn empirical_fa<S: ScaleIndex>(
    model: &ClaimModel,
    set: &S,
    levels: &[f64],
    n: u64,
    stream: RngStream,
) -> Result<TailCurve> {
    prepare(model, set, levels, n)?;
    let counts = count_exceedances(model, set, levels, n, stream, single);
    Ok(survival_curve(levels, &counts, n))
}

fn survival_curve(levels: &[f64], counts: &[u64], n: u64) -> TailCurve {
    TailCurve {
        method: Method::Mc,
        n,
        points: levels
            .iter()
            .zip(counts)
            .map(|(&u, &k)| CurvePoint {
                level: u,
                estimate: k as f64 / n as f64,
                stderr: binomial_stderr(k, n),
                flag: if k < MIN_HITS { PointFlag::FewHits } else { PointFlag::Ok },
                hits: Some(k),
                median_of_means: None,
                tail_part: None,
            })
            .collect(),
    }
}

/// The scalarized sample `Y(X_1), …, Y(X_n)` drawn exactly as in [`empirical_fa`].
pub fn scalarized_sample<S: ScaleIndex>(model: &ClaimModel, set: &S, n: u64, stream: RngStream) -> Result<Vec<f64>> {
    check_dim(model.dim(), set.dim())?;
    let d = model.dim();
    let blocks = map_blocks(n, stream, |s, len| {
        let mut sampler = model.sampler().expect("validated");
        let mut rng = s.rng();
        let mut x = vec![0.0; d];
        (0..len)
            .map(|_| {
                sampler.draw(&mut rng, &mut x);
                set.index(&x)
            })
            .collect::<Vec<f64>>()
    });
    Ok(blocks.concat())
}

/// Empirical `q`-quantile of `Y(X)` from `n` draws.
pub fn empirical_quantile<S: ScaleIndex>(model: &ClaimModel, set: &S, q: f64, n: u64, stream: RngStream) -> Result<f64> {
    if !(0.0..1.0).contains(&q) || n == 0 {
        return Err(Error::param("quantile level must lie in [0, 1) and n must be positive"));
    }
    let mut ys = scalarized_sample(model, set, n, stream)?;
    let k = ((q * n as f64).ceil() as usize).clamp(1, ys.len()) - 1;
    let (_, v, _) = ys.select_nth_unstable_by(k, f64::total_cmp);
    Ok(*v)
}

/// Lower and upper bounds for `F^{*m}(uA)` at one level, next to its estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichPoint {
    pub u: f64,
    /// Estimate of `P(Y(X_1 + … + X_m) > u)`.
    pub estimate: f64,
    pub estimate_stderr: f64,
    /// `1 − (1 − F̂_A(u))^m` from the denominator sample.
    pub lower: f64,
    pub lower_stderr: f64,
    /// Estimate of `P(Y(X_1) + … + Y(X_m) > u)` on the numerator sample.
    pub upper: f64,
    /// Estimate outside `[lower − 3σ, upper]`.
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionReport {
    pub m: usize,
    pub verdict: RatioVerdict,
    pub sandwich: Vec<SandwichPoint>,
    pub numerator_hits: Vec<u64>,
    pub denominator_hits: Vec<u64>,
}

impl ConvolutionReport {
    pub fn sandwich_holds(&self) -> bool {
        self.sandwich.iter().all(|p| !p.violated)
    }
}

/// `P(X⁽¹⁾ + … + X⁽ᵐ⁾ ∈ uA) / P(X ∈ uA)` with target `m`.
pub fn convolution_ratio_mc<S: ScaleIndex>(
    model: &ClaimModel,
    set: &S,
    m: usize,
    levels: &[f64],
    n: u64,
    stream: RngStream,
) -> Result<ConvolutionReport> {
    prepare(model, set, levels, n)?;
    if m == 0 {
        return Err(Error::param("number of terms must be at least 1"));
    }
    let den = count_exceedances(model, set, levels, n, stream.split(0), single);
    if m == 1 {
        let points = levels.iter().map(|&u| RatioPoint { u, ratio: 1.0, lo: 1.0, hi: 1.0 }).collect();
        let sandwich = levels
            .iter()
            .zip(&den)
            .map(|(&u, &k)| {
                let p = k as f64 / n as f64;
                SandwichPoint {
                    u,
                    estimate: p,
                    estimate_stderr: binomial_stderr(k, n),
                    lower: p,
                    lower_stderr: 0.0,
                    upper: p,
                    violated: false,
                }
            })
            .collect();
        return Ok(ConvolutionReport {
            m,
            verdict: RatioVerdict::judge(1.0, points, &[], 0.0),
            sandwich,
            numerator_hits: den.clone(),
            denominator_hits: den,
        });
    }

    let d = model.dim();
    let k_levels = levels.len();
    let hists = map_blocks(n, stream.split(1), |s, len| {
        let mut sampler = model.sampler().expect("validated");
        let mut rng = s.rng();
        let mut x = vec![0.0; d];
        let mut sum = vec![0.0; d];
        let mut h_sum = vec![0u64; k_levels + 1];
        let mut h_up = vec![0u64; k_levels + 1];
        for _ in 0..len {
            sum.iter_mut().for_each(|v| *v = 0.0);
            let mut up = 0.0;
            for _ in 0..m {
                sampler.draw(&mut rng, &mut x);
                up += set.index(&x);
                for (a, b) in sum.iter_mut().zip(&x) {
                    *a += b;
                }
            }
            h_sum[bucket(levels, set.index(&sum))] += 1;
            h_up[bucket(levels, up)] += 1;
        }
        (h_sum, h_up)
    });
    let (h_sum, h_up) = hists
        .into_iter()
        .reduce(|a, b| (merge_hist(a.0, b.0), merge_hist(a.1, b.1)))
        .expect("n > 0");
    let num = exceedances(&h_sum);
    let up = exceedances(&h_up);

    let z = z_for_level(CONFIDENCE);
    let mut points = Vec::with_capacity(k_levels);
    let mut reliable = Vec::with_capacity(k_levels);
    let mut sandwich = Vec::with_capacity(k_levels);
    let nf = n as f64;
    for j in 0..k_levels {
        let (r, lo, hi) = ratio_ci(num[j], n, den[j], n, z);
        points.push(RatioPoint { u: levels[j], ratio: r, lo, hi });
        reliable.push(num[j] >= MIN_HITS && den[j] >= MIN_HITS);
        let p = den[j] as f64 / nf;
        let lower = 1.0 - (1.0 - p).powi(m as i32);
        let lower_se = m as f64 * (1.0 - p).powi(m as i32 - 1) * binomial_stderr(den[j], n);
        let est = num[j] as f64 / nf;
        let est_se = binomial_stderr(num[j], n);
        let noise = 3.0 * (lower_se * lower_se + est_se * est_se).sqrt();
        sandwich.push(SandwichPoint {
            u: levels[j],
            estimate: est,
            estimate_stderr: est_se,
            lower,
            lower_stderr: lower_se,
            upper: up[j] as f64 / nf,
            violated: est < lower - noise || num[j] > up[j],
        });
    }
    Ok(ConvolutionReport {
        m,
        verdict: RatioVerdict::judge(m as f64, points, &reliable, 0.0),
        sandwich,
        numerator_hits: num,
        denominator_hits: den,
    })
}

fn ratio_verdict(target: f64, levels: &[f64], num: &[u64], den: &[u64], n: u64) -> RatioVerdict {
    let z = z_for_level(CONFIDENCE);
    let mut points = Vec::with_capacity(levels.len());
    let mut reliable = Vec::with_capacity(levels.len());
    for j in 0..levels.len() {
        let (r, lo, hi) = ratio_ci(num[j], n, den[j], n, z);
        points.push(RatioPoint { u: levels[j], ratio: r, lo, hi });
        reliable.push(num[j] >= MIN_HITS && den[j] >= MIN_HITS);
    }
    RatioVerdict::judge(target, points, &reliable, 0.0)
}

fn identity_verdict(levels: &[f64]) -> RatioVerdict {
    let points = levels.iter().map(|&u| RatioPoint { u, ratio: 1.0, lo: 1.0, hi: 1.0 }).collect();
    RatioVerdict::judge(1.0, points, &[], 0.0)
}

/// `P(X⁽¹⁾ + … + X⁽ᴺ⁾ ∈ uA) / P(X ∈ uA)` for `N` geometric on `{1, 2, …}`
/// with success probability `p`; target `E N = 1/p`.
pub fn random_sum_ratio<S: ScaleIndex>(
    model: &ClaimModel,
    set: &S,
    p: f64,
    levels: &[f64],
    n: u64,
    stream: RngStream,
) -> Result<RatioVerdict> {
    prepare(model, set, levels, n)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::param("geometric parameter must lie in (0, 1]"));
    }
    if p == 1.0 {
        return Ok(identity_verdict(levels));
    }
    let den = count_exceedances(model, set, levels, n, stream.split(0), single);
    let log_q = (1.0 - p).ln();
    let num = count_exceedances(model, set, levels, n, stream.split(1), move |sampler, rng, set, x, acc| {
        let u: f64 = 1.0 - rng.random::<f64>();
        let terms = 1 + (u.ln() / log_q).floor() as u64;
        acc.iter_mut().for_each(|v| *v = 0.0);
        for _ in 0..terms {
            sampler.draw(rng, x);
            for (a, b) in acc.iter_mut().zip(x.iter()) {
                *a += b;
            }
        }
        set.index(acc)
    });
    Ok(ratio_verdict(1.0 / p, levels, &num, &den, n))
}

/// `P(X ∈ uA + a) / P(X ∈ uA)`, target 1.
pub fn translation_test<S: ScaleIndex>(
    model: &ClaimModel,
    set: &S,
    a: &[f64],
    levels: &[f64],
    n: u64,
    stream: RngStream,
) -> Result<RatioVerdict> {
    prepare(model, set, levels, n)?;
    check_dim(model.dim(), a.len())?;
    if a.iter().all(|&v| v == 0.0) {
        return Ok(identity_verdict(levels));
    }
    let den = count_exceedances(model, set, levels, n, stream.split(0), single);
    let shift = a.to_vec();
    let num = count_exceedances(model, set, levels, n, stream.split(1), move |sampler, rng, set, x, _| {
        sampler.draw(rng, x);
        for (v, s) in x.iter_mut().zip(&shift) {
            *v -= s;
        }
        set.index(x)
    });
    Ok(ratio_verdict(1.0, levels, &num, &den, n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KestenRow {
    pub m: usize,
    pub u: f64,
    pub ratio: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KestenReport {
    pub epsilon: f64,
    pub m_max: usize,
    /// Smallest `K` with every estimated ratio `≤ K (1 + ε)^m`.
    pub k: f64,
    pub rows: Vec<KestenRow>,
}

/// Fits the Kesten-type constant over `m = 1..=m_max` and all grid levels
/// with at least [`MIN_HITS`] denominator hits.
pub fn kesten_check<S: ScaleIndex>(
    model: &ClaimModel,
    set: &S,
    epsilon: f64,
    m_max: usize,
    levels: &[f64],
    n: u64,
    stream: RngStream,
) -> Result<KestenReport> {
    prepare(model, set, levels, n)?;
    if !(epsilon > 0.0) || m_max == 0 {
        return Err(Error::param("kesten check needs epsilon > 0 and m_max >= 1"));
    }
    let mut rows = Vec::new();
    let mut k = 0.0f64;
    for m in 1..=m_max {
        let rep = convolution_ratio_mc(model, set, m, levels, n, stream.split(m as u64))?;
        for (j, p) in rep.verdict.points.iter().enumerate() {
            if rep.denominator_hits[j] < MIN_HITS {
                continue;
            }
            k = k.max(p.ratio / (1.0 + epsilon).powi(m as i32));
            rows.push(KestenRow { m, u: p.u, ratio: p.ratio, lo: p.lo, hi: p.hi });
        }
    }
    Ok(KestenReport { epsilon, m_max, k, rows })
}
