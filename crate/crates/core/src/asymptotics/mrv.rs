use serde::{Deserialize, Serialize};

use crate::claims::{AngularMeasure, OneDimLaw};
use crate::quad::{self, TailRate};
use crate::rng::RngStream;
use crate::ruinsets::HyperplaneFamily;
use crate::{Error, Result};

/// Standard multivariate regular variation: `P(‖X‖₁ > u) · μ_u → μ` with
/// tail index `alpha` and spectral measure `angular` of total mass 1 on the
/// `L¹` unit sphere, i.e. `μ{ x : ‖x‖₁ > r, x/‖x‖₁ ∈ B } = r^(-α) σ(B)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MrvDescriptor {
    pub alpha: f64,
    pub angular: AngularMeasure,
    /// Law of `‖X‖₁`, used for the normalization `u P(‖X‖₁ > u)`.
    pub norm_law: OneDimLaw,
}

impl MrvDescriptor {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(Error::param("mrv constant needs alpha > 1 (the v-integral diverges otherwise)"));
        }
        self.angular.validate()?;
        self.norm_law.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MrvConstant {
    pub alpha: f64,
    pub constant: f64,
    pub quadrature_error: f64,
    /// Standard error from sampling a continuous angular measure.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc_stderr: Option<f64>,
}

/// `∫σ(dθ) [min_k (1 + v p_kᵀc) / (p_kᵀθ)]^(-α)`, with directions that do
/// not see `θ` left out of the minimum.
fn prepare(family: &HyperplaneFamily, c: &[f64], theta: &[f64]) -> Vec<(f64, f64)> {
    family
        .directions()
        .iter()
        .map(|p| (dot(p, c), dot(p, theta)))
        .filter(|&(_, pt)| pt > 0.0)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn envelope(dirs: &[(f64, f64)], v: f64, alpha: f64) -> f64 {
    let need = dirs.iter().map(|&(pc, pt)| (1.0 + v * pc) / pt).fold(f64::INFINITY, f64::min);
    if need.is_finite() {
        need.powf(-alpha)
    } else {
        0.0
    }
}

fn checks(mrv: &MrvDescriptor, family: &HyperplaneFamily, c: &[f64]) -> Result<()> {
    mrv.validate()?;
    super::check_drift(c)?;
    crate::error::check_dim(family.dim(), c.len())?;
    crate::error::check_dim(family.dim(), mrv.angular.dim())
}

/// `∫₀^∞ μ(A + v c) dv` for an atomic spectral measure (normalized to mass 1).
pub fn mrv_ruin_constant(mrv: &MrvDescriptor, family: &HyperplaneFamily, c: &[f64]) -> Result<MrvConstant> {
    checks(mrv, family, c)?;
    let sigma = mrv.angular.normalized();
    let atoms = sigma
        .atom_list()
        .ok_or_else(|| Error::Unsupported("continuous spectral measures need mrv_ruin_constant_sampled".into()))?;
    let prepared: Vec<(f64, Vec<(f64, f64)>)> = atoms.iter().map(|a| (a.weight, prepare(family, c, &a.theta))).collect();
    let alpha = mrv.alpha;
    let g = |v: f64| prepared.iter().map(|(w, dirs)| w * envelope(dirs, v, alpha)).sum::<f64>();
    let cmax = c.iter().copied().fold(0.0, f64::max);
    let q = quad::integrate_to_infinity(g, 0.0, 1.0 / cmax, 1e-12, TailRate::Known(alpha))?;
    Ok(MrvConstant { alpha, constant: q.value, quadrature_error: q.error, mc_stderr: None })
}

/// Constant for a continuous spectral measure: the per-angle integrals are
/// computed by quadrature for `n` sampled angles and averaged.
pub fn mrv_ruin_constant_sampled(
    mrv: &MrvDescriptor,
    family: &HyperplaneFamily,
    c: &[f64],
    n: usize,
    stream: RngStream,
) -> Result<MrvConstant> {
    checks(mrv, family, c)?;
    if n < 2 {
        return Err(Error::param("need at least two sampled angles"));
    }
    let sigma = mrv.angular.normalized();
    let mut rng = stream.rng();
    let mut theta = vec![0.0; family.dim()];
    let cmax = c.iter().copied().fold(0.0, f64::max);
    let mut vals = Vec::with_capacity(n);
    let mut qerr = 0.0;
    for _ in 0..n {
        sigma.sample_into(&mut rng, &mut theta);
        let dirs = prepare(family, c, &theta);
        if dirs.is_empty() {
            vals.push(0.0);
            continue;
        }
        let q = quad::integrate_to_infinity(|v| envelope(&dirs, v, mrv.alpha), 0.0, 1.0 / cmax, 1e-10, TailRate::Known(mrv.alpha))?;
        qerr += q.error;
        vals.push(q.value);
    }
    let mean = vals.iter().sum::<f64>() / n as f64;
    let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    Ok(MrvConstant {
        alpha: mrv.alpha,
        constant: mean,
        quadrature_error: qerr / n as f64,
        mc_stderr: Some((var / n as f64).sqrt()),
    })
}

/// `u P(‖X‖₁ > u) · constant`, the regular-variation form of the asymptote.
pub fn mrv_asymptote(mrv: &MrvDescriptor, constant: &MrvConstant, u: f64) -> f64 {
    u * mrv.norm_law.survival(u) * constant.constant
}
