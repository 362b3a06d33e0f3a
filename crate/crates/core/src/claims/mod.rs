//! Claim-size laws: one-dimensional heavy-tailed families, angular
//! measures and `d`-dimensional claim models with seeded samplers.

mod angular;
mod dyadic;
mod law;
mod model;
mod oscillating;

pub use angular::{AngularMeasure, Atom};
pub use dyadic::{crnonlin_sum_survival, crnonlin_survival};
pub use law::OneDimLaw;
pub use model::{ClaimModel, Sampler};
pub use oscillating::{
    amplitude_bound as oscillating_amplitude_bound, density_bounds as oscillating_density_bounds,
    gamma_limit as oscillating_gamma_limit,
};
pub(crate) use model::axis_weights;
