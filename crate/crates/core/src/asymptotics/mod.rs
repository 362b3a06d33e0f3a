//! The ruin asymptote `H(u) = ∫₀^∞ F(uA + v c) dv`, the normalizer `θ`,
//! the scalarized integrated law and regular-variation constants.

mod hcurve;
mod loading;
mod mrv;
mod theta;

pub use hcurve::{fi_scalar_survival, fi_scalar_survival_mc, h_curve_mc, h_curve_quadrature, MOM_BLOCKS};
pub use loading::{Provenance, SafetyLoading};
pub use mrv::{mrv_asymptote, mrv_ruin_constant, mrv_ruin_constant_sampled, MrvConstant, MrvDescriptor};
pub use theta::{theta_normalizer, theta_normalizer_mc, Estimate};

pub(crate) fn check_drift(c: &[f64]) -> crate::Result<()> {
    if c.is_empty() || c.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(crate::Error::param("drift c must be componentwise positive"));
    }
    Ok(())
}
