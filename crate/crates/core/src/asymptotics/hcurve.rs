use crate::claims::{axis_weights, ClaimModel, OneDimLaw};
use crate::diagnostics::{check_grid, CurvePoint, Method, PointFlag, TailCurve};
use crate::parallel::map_blocks_at;
use crate::quad::{self, Quadrature, TailRate};
use crate::rng::RngStream;
use crate::ruinsets::{HyperplaneFamily, ScaleIndex};
use crate::stats::{median_of_means, Moments};
use crate::{Error, Result};

use super::theta::{theta_normalizer, theta_normalizer_mc};

/// Number of groups for the median-of-means companion estimate.
pub const MOM_BLOCKS: usize = 16;

/// Share of the total carried by the largest sample that trips the heavy-tail flag.
const HEAVY_SHARE: f64 = 0.1;

const OUTER_RTOL: f64 = 1e-9;
const INNER_RTOL: f64 = 1e-11;

/// `Ĥ(u) = (1/n) Σ V(X_i, u)` with `V` the excess sojourn. Each sample is
/// an unbiased draw of `H(u)` since `{ v ≥ 0 : X − v c ∈ uA }` is `[0, V)`.
pub fn h_curve_mc<S: ScaleIndex>(
    model: &ClaimModel,
    set: &S,
    c: &[f64],
    levels: &[f64],
    n: u64,
    stream: RngStream,
) -> Result<TailCurve> {
    check_grid(levels)?;
    super::check_drift(c)?;
    crate::error::check_dim(model.dim(), set.dim())?;
    crate::error::check_dim(model.dim(), c.len())?;
    model.validate()?;
    if n == 0 {
        return Err(Error::param("sample size must be positive"));
    }
    let d = model.dim();
    let k = levels.len();
    let parts = map_blocks_at(n, stream, |s, start, len| {
        let mut sampler = model.sampler().expect("validated");
        let mut rng = s.rng();
        let mut x = vec![0.0; d];
        let mut mom = vec![Moments::default(); k];
        let mut groups = vec![[0.0f64; MOM_BLOCKS]; k];
        for i in 0..len as u64 {
            sampler.draw(&mut rng, &mut x);
            let g = (((start + i) as u128 * MOM_BLOCKS as u128) / n as u128) as usize;
            for j in 0..k {
                // The sojourn is nonincreasing in u, so later levels are zero too.
                let v = set.sojourn(&x, c, levels[j]);
                if v > 0.0 {
                    mom[j].push(v);
                    groups[j][g] += v;
                } else {
                    for m in &mut mom[j..] {
                        m.push(0.0);
                    }
                    break;
                }
            }
        }
        (mom, groups)
    });
    let mut mom = vec![Moments::default(); k];
    let mut groups = vec![[0.0f64; MOM_BLOCKS]; k];
    for (m, g) in parts {
        for j in 0..k {
            mom[j] = mom[j].merge(m[j]);
            for b in 0..MOM_BLOCKS {
                groups[j][b] += g[j][b];
            }
        }
    }
    let sizes: Vec<u64> = (0..MOM_BLOCKS as u64)
        .map(|b| {
            let lo = (b * n).div_ceil(MOM_BLOCKS as u64);
            let hi = ((b + 1) * n).div_ceil(MOM_BLOCKS as u64);
            hi - lo
        })
        .collect();
    let points = (0..k)
        .map(|j| {
            let m = &mom[j];
            let means: Vec<f64> = (0..MOM_BLOCKS).filter(|&b| sizes[b] > 0).map(|b| groups[j][b] / sizes[b] as f64).collect();
            let (med, med_se) = median_of_means(&means);
            let heavy = m.sum > 0.0 && m.max > HEAVY_SHARE * m.sum;
            CurvePoint {
                level: levels[j],
                estimate: m.mean,
                stderr: if heavy { med_se.max(m.stderr()) } else { m.stderr() },
                flag: if heavy { PointFlag::HeavyTail } else { PointFlag::Ok },
                hits: None,
                median_of_means: Some(med),
                tail_part: None,
            }
        })
        .collect();
    Ok(TailCurve { method: Method::Mc, n, points })
}

fn marginal_rate(laws: &[&OneDimLaw]) -> TailRate {
    laws.iter()
        .map(|m| m.tail_index())
        .try_fold(f64::INFINITY, |acc, a| a.map(|a| acc.min(a)))
        .map(TailRate::Known)
        .unwrap_or(TailRate::Fitted)
}

/// `P(a X₁ + b X₂ > s)` for independent nonnegative `X₁, X₂`, written as
/// `F̄₁(s/a) + ∫₀^{F₁(s/a)} F̄₂((s − a Q₁(q))/b) dq`.
fn two_term_survival(l1: &OneDimLaw, a: f64, l2: &OneDimLaw, b: f64, s: f64) -> f64 {
    if s <= 0.0 {
        return 1.0;
    }
    let top = l1.cdf(s / a);
    let inner = quad::integrate(|q| l2.survival((s - a * l1.quantile(q)) / b), 0.0, top, INNER_RTOL, 1e-300);
    l1.survival(s / a) + inner.value
}

/// `H(u)` by quadrature for the supported model/family pairs:
///
/// - independent marginals with a union of coordinate half-spaces, where
///   `F(uA + vc) = 1 − Π_j (1 − F̄_j(u/w_j + v c_j))` (inclusion–exclusion
///   in product form);
/// - independent marginals with a single direction touching at most two
///   coordinates, through the law of `pᵀX`;
/// - polar models with an atomic angular measure;
/// - deterministic claims.
pub fn h_curve_quadrature(model: &ClaimModel, family: &HyperplaneFamily, c: &[f64], levels: &[f64]) -> Result<TailCurve> {
    check_grid(levels)?;
    super::check_drift(c)?;
    crate::error::check_dim(model.dim(), family.dim())?;
    crate::error::check_dim(model.dim(), c.len())?;
    model.validate()?;
    let cmax = c.iter().copied().fold(0.0, f64::max);
    let mut points = Vec::with_capacity(levels.len());
    let mut method = Method::Quadrature;
    for &u in levels {
        let q: Quadrature = match model {
            ClaimModel::Deterministic { value } => {
                method = Method::ClosedForm;
                let v = family.sojourn_of(value, c, u);
                Quadrature { value: v, error: 0.0, tail: 0.0 }
            }
            ClaimModel::Independent { marginals } => independent_h(marginals, family, c, u, cmax)?,
            ClaimModel::Polar { angular, radial, radial_scale } => {
                let atoms = angular
                    .atom_list()
                    .ok_or_else(|| Error::Unsupported("quadrature needs an atomic angular measure".into()))?;
                let mass = angular.total_mass();
                // Per atom: (weight, [(p_kᵀc, a_θ p_kᵀθ)] over directions seeing the atom).
                let prepared: Vec<(f64, Vec<(f64, f64)>)> = atoms
                    .iter()
                    .map(|a| {
                        let at = radial_scale.as_ref().map(|s| s.iter().zip(&a.theta).map(|(x, y)| x * y).sum()).unwrap_or(1.0);
                        let dirs = family
                            .directions()
                            .iter()
                            .map(|p| (dot(p, c), at * dot(p, &a.theta)))
                            .filter(|&(_, pt)| pt > 0.0)
                            .collect();
                        (a.weight / mass, dirs)
                    })
                    .collect();
                let g = |v: f64| -> f64 {
                    prepared
                        .iter()
                        .map(|(w, dirs)| {
                            let need = dirs.iter().map(|&(pc, pt)| (u + v * pc) / pt).fold(f64::INFINITY, f64::min);
                            if need.is_finite() {
                                w * radial.survival(need)
                            } else {
                                0.0
                            }
                        })
                        .sum()
                };
                let rate = radial.tail_index().map(TailRate::Known).unwrap_or(TailRate::Fitted);
                quad::integrate_to_infinity(g, 0.0, (u / cmax).max(1e-9), OUTER_RTOL, rate)?
            }
            _ => return Err(Error::Unsupported("no quadrature for this claim model; use the Monte Carlo estimator".into())),
        };
        points.push(CurvePoint {
            level: u,
            estimate: q.value,
            stderr: 0.0,
            flag: PointFlag::Ok,
            hits: None,
            median_of_means: None,
            tail_part: Some(q.tail),
        });
    }
    Ok(TailCurve { method, n: 0, points })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn independent_h(marginals: &[OneDimLaw], family: &HyperplaneFamily, c: &[f64], u: f64, cmax: f64) -> Result<Quadrature> {
    if let Some(w) = axis_weights(family) {
        let active: Vec<usize> = (0..w.len()).filter(|&j| w[j] > 0.0).collect();
        let rate = marginal_rate(&active.iter().map(|&j| &marginals[j]).collect::<Vec<_>>());
        let g = |v: f64| -> f64 {
            let log_keep: f64 = active.iter().map(|&j| (-marginals[j].survival(u / w[j] + v * c[j])).ln_1p()).sum();
            -log_keep.exp_m1()
        };
        return quad::integrate_to_infinity(g, 0.0, (u / cmax).max(1e-9), OUTER_RTOL, rate);
    }
    if family.directions().len() == 1 {
        let p = &family.directions()[0];
        let nz: Vec<usize> = (0..p.len()).filter(|&j| p[j] > 0.0).collect();
        if nz.len() == 2 {
            let (i, j) = (nz[0], nz[1]);
            let pc = dot(p, c);
            let rate = marginal_rate(&[&marginals[i], &marginals[j]]);
            let g = |v: f64| two_term_survival(&marginals[i], p[i], &marginals[j], p[j], u + v * pc);
            return quad::integrate_to_infinity(g, 0.0, (u / pc).max(1e-9), OUTER_RTOL, rate);
        }
    }
    Err(Error::Unsupported(
        "quadrature supports coordinate unions or a single direction over at most two coordinates".into(),
    ))
}

/// `(F^I)_A`-bar`(u) = H(u) / θ` from quadrature and the analytic `θ`.
///
/// `F^I` is a probability on `[0, ∞)^d` but `uA` reaches outside the orthant,
/// so in `d ≥ 2` values above 1 at small `u` are expected.
pub fn fi_scalar_survival(model: &ClaimModel, family: &HyperplaneFamily, c: &[f64], levels: &[f64]) -> Result<TailCurve> {
    let theta = theta_normalizer(model, c)?;
    Ok(h_curve_quadrature(model, family, c, levels)?.scaled(1.0 / theta.value))
}

/// Monte Carlo version of [`fi_scalar_survival`]; `θ` is estimated on an
/// independent sub-stream and its error propagated to first order.
pub fn fi_scalar_survival_mc<S: ScaleIndex>(
    model: &ClaimModel,
    set: &S,
    c: &[f64],
    levels: &[f64],
    n: u64,
    stream: RngStream,
) -> Result<TailCurve> {
    let theta = theta_normalizer_mc(model, c, n, stream.split(1))?;
    let mut h = h_curve_mc(model, set, c, levels, n, stream.split(0))?.scaled(1.0 / theta.value);
    let rel_t = theta.stderr / theta.value;
    for p in &mut h.points {
        p.stderr = (p.stderr * p.stderr + (p.estimate * rel_t).powi(2)).sqrt();
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::claims::AngularMeasure;

    #[test]
    fn one_dimensional_closed_form() {
        let m = ClaimModel::independent(vec![OneDimLaw::pareto(2.0, 1.0)]).unwrap();
        let f = HyperplaneFamily::new(1, vec![vec![1.0]]).unwrap();
        for c in [0.5, 1.0, 3.0] {
            let h = h_curve_quadrature(&m, &f, &[c], &[1.0, 5.0, 50.0]).unwrap();
            for p in &h.points {
                let exact = 1.0 / (p.level * c);
                assert!((p.estimate - exact).abs() < 1e-8 * exact, "{p:?}");
            }
        }
    }

    #[test]
    fn union_example() {
        let m = ClaimModel::independent(vec![OneDimLaw::pareto(2.0, 1.0); 2]).unwrap();
        let f = HyperplaneFamily::union(&[1.0, 1.0]).unwrap();
        let h = h_curve_quadrature(&m, &f, &[1.0, 1.0], &[10.0]).unwrap();
        let exact = 0.2 - 1e-3 / 3.0;
        assert!((h.points[0].estimate - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn two_term_law_matches_mc() {
        let m = ClaimModel::independent(vec![OneDimLaw::pareto(2.5, 1.0), OneDimLaw::exponential(0.5)]).unwrap();
        let f = HyperplaneFamily::aggregate(&[0.5, 0.25]).unwrap();
        let c = [1.0, 1.0];
        let q = h_curve_quadrature(&m, &f, &c, &[2.0, 8.0]).unwrap();
        let mc = h_curve_mc(&m, &f, &c, &[2.0, 8.0], 400_000, RngStream::new(8, 0)).unwrap();
        for (a, b) in q.points.iter().zip(&mc.points) {
            assert!((a.estimate - b.estimate).abs() < 4.0 * b.stderr, "{a:?} {b:?}");
        }
    }

    #[test]
    fn deterministic_mc_is_exact() {
        let m = ClaimModel::Deterministic { value: vec![6.0, 2.0] };
        let f = HyperplaneFamily::aggregate(&[0.5, 0.5]).unwrap();
        let h = h_curve_mc(&m, &f, &[1.0, 1.0], &[1.0, 2.0, 5.0], 1000, RngStream::new(1, 1)).unwrap();
        assert_eq!(h.values(), vec![3.0, 2.0, 0.0]);
        assert!(h.points.iter().all(|p| p.stderr == 0.0));
    }

    #[test]
    fn polar_atomic_matches_mc() {
        let ang = AngularMeasure::atoms(vec![(vec![0.5, 0.5], 1.0), (vec![0.9, 0.1], 2.0)]).unwrap();
        let m = ClaimModel::polar(ang, OneDimLaw::pareto(2.5, 1.0), None).unwrap();
        let f = HyperplaneFamily::union(&[1.0, 2.0]).unwrap();
        let c = [0.7, 1.2];
        let q = h_curve_quadrature(&m, &f, &c, &[1.0, 4.0]).unwrap();
        let mc = h_curve_mc(&m, &f, &c, &[1.0, 4.0], 400_000, RngStream::new(2, 0)).unwrap();
        for (a, b) in q.points.iter().zip(&mc.points) {
            assert!((a.estimate - b.estimate).abs() < 4.0 * b.stderr, "{a:?} {b:?}");
        }
    }

    #[test]
    fn fi_one_dimensional() {
        let m = ClaimModel::independent(vec![OneDimLaw::pareto(2.0, 1.0)]).unwrap();
        let f = HyperplaneFamily::new(1, vec![vec![1.0]]).unwrap();
        let s = fi_scalar_survival(&m, &f, &[1.0], &[1e-9, 1.0, 10.0]).unwrap();
        assert!((s.points[0].estimate - 1.0).abs() < 1e-8);
        assert!((s.points[2].estimate - 0.05).abs() < 1e-9);
    }
}
