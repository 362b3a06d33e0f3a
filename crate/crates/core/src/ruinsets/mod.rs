//! Ruin sets: open, increasing sets with convex complement whose closure
//! avoids the origin, represented by finitely many supporting directions.

mod bidask;
mod descriptor;
mod family;

pub use bidask::{compile_bidask, BidAskSpec, MAX_ENUM_DIM};
pub use descriptor::RuinSetDescriptor;
pub use family::{validate, HyperplaneFamily, LinearMapSpec, Violation};

use crate::Result;

/// A ruin set either with explicit supporting directions or, for bid-ask
/// sets in dimensions where rays are not enumerated, through cone LPs.
#[derive(Debug, Clone, PartialEq)]
pub enum RuinSet {
    Hyperplanes(HyperplaneFamily),
    Cone(BidAskSpec),
}

impl From<HyperplaneFamily> for RuinSet {
    fn from(f: HyperplaneFamily) -> Self {
        RuinSet::Hyperplanes(f)
    }
}

impl RuinSet {
    /// Bid-ask set, compiled to directions when `d ≤ 3`.
    pub fn from_bidask(spec: BidAskSpec) -> Result<Self> {
        if spec.dim() <= MAX_ENUM_DIM {
            Ok(RuinSet::Hyperplanes(compile_bidask(&spec)?))
        } else {
            Ok(RuinSet::Cone(spec))
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RuinSet::Hyperplanes(f) => f.dim(),
            RuinSet::Cone(s) => s.dim(),
        }
    }

    pub fn family(&self) -> Option<&HyperplaneFamily> {
        match self {
            RuinSet::Hyperplanes(f) => Some(f),
            RuinSet::Cone(_) => None,
        }
    }

    pub fn scale_index(&self, x: &[f64]) -> Result<f64> {
        match self {
            RuinSet::Hyperplanes(f) => f.scale_index(x),
            RuinSet::Cone(s) => s.lp_scale_index(x),
        }
    }

    pub fn max_projection(&self, x: &[f64]) -> Result<f64> {
        match self {
            RuinSet::Hyperplanes(f) => {
                crate::error::check_dim(f.dim(), x.len())?;
                Ok(f.max_projection(x))
            }
            RuinSet::Cone(s) => s.lp_max_projection(x),
        }
    }

    pub fn contains(&self, x: &[f64], u: f64) -> Result<bool> {
        match self {
            RuinSet::Hyperplanes(f) => f.contains(x, u),
            RuinSet::Cone(s) => {
                if !(u > 0.0) {
                    return Err(crate::Error::param("level u must be positive"));
                }
                Ok(s.lp_scale_index(x)? > u)
            }
        }
    }

    pub fn excess_sojourn(&self, x: &[f64], c: &[f64], u: f64) -> Result<f64> {
        match self {
            RuinSet::Hyperplanes(f) => f.excess_sojourn(x, c, u),
            RuinSet::Cone(s) => {
                if c.iter().any(|&v| !(v > 0.0)) {
                    return Err(crate::Error::param("drift c must be componentwise positive"));
                }
                s.lp_sojourn(x, c, u)
            }
        }
    }
}

/// Scalarization used by the estimators; implemented by explicit families
/// and by LP-backed cone sets (where a failed LP yields `NaN`).
pub trait ScaleIndex: Sync {
    fn dim(&self) -> usize;
    /// `Y(x) = max(0, max_k p_kᵀx)`.
    fn index(&self, x: &[f64]) -> f64;
    /// `max_k p_kᵀx`, possibly negative.
    fn projection(&self, x: &[f64]) -> f64;
    /// `max(0, max_k (p_kᵀx − u)/(p_kᵀc))`.
    fn sojourn(&self, x: &[f64], c: &[f64], u: f64) -> f64;
}

impl ScaleIndex for HyperplaneFamily {
    fn dim(&self) -> usize {
        HyperplaneFamily::dim(self)
    }
    #[inline]
    fn index(&self, x: &[f64]) -> f64 {
        self.index_of(x)
    }
    #[inline]
    fn projection(&self, x: &[f64]) -> f64 {
        self.max_projection(x)
    }
    #[inline]
    fn sojourn(&self, x: &[f64], c: &[f64], u: f64) -> f64 {
        self.sojourn_of(x, c, u)
    }
}

impl ScaleIndex for RuinSet {
    fn dim(&self) -> usize {
        RuinSet::dim(self)
    }
    #[inline]
    fn index(&self, x: &[f64]) -> f64 {
        match self {
            RuinSet::Hyperplanes(f) => f.index_of(x),
            RuinSet::Cone(s) => s.lp_scale_index(x).unwrap_or(f64::NAN),
        }
    }
    #[inline]
    fn projection(&self, x: &[f64]) -> f64 {
        match self {
            RuinSet::Hyperplanes(f) => f.max_projection(x),
            RuinSet::Cone(s) => s.lp_max_projection(x).unwrap_or(f64::NAN),
        }
    }
    #[inline]
    fn sojourn(&self, x: &[f64], c: &[f64], u: f64) -> f64 {
        match self {
            RuinSet::Hyperplanes(f) => f.sojourn_of(x, c, u),
            RuinSet::Cone(s) => s.lp_sojourn(x, c, u).unwrap_or(f64::NAN),
        }
    }
}
