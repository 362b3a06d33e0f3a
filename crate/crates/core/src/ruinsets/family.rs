use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::check_dim;
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Relation};
use crate::{Error, Result};

/// A ruin set `A = { x : p_kᵀx > 1 for some k }` given by its supporting
/// directions. Scaling `A` by `u` keeps the directions and scales the level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperplaneFamily {
    dim: usize,
    directions: Vec<Vec<f64>>,
}

/// First invariant broken by a candidate family.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    EmptyFamily,
    ZeroDimension,
    WrongLength { index: usize, len: usize },
    NonFinite { index: usize },
    NegativeComponent { index: usize, component: usize },
    ZeroDirection { index: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptyFamily => write!(f, "empty direction list"),
            Violation::ZeroDimension => write!(f, "dimension must be positive"),
            Violation::WrongLength { index, len } => {
                write!(f, "direction {index} has length {len}")
            }
            Violation::NonFinite { index } => write!(f, "direction {index} is not finite"),
            Violation::NegativeComponent { index, component } => {
                write!(f, "negative component {component} in direction {index}")
            }
            Violation::ZeroDirection { index } => write!(f, "zero direction at index {index}"),
        }
    }
}

impl From<Violation> for Error {
    fn from(v: Violation) -> Self {
        Error::InvalidRuinSet(v.to_string())
    }
}

/// Checks every structural invariant and returns the first violation.
pub fn validate(dim: usize, directions: &[Vec<f64>]) -> std::result::Result<(), Violation> {
    if dim == 0 {
        return Err(Violation::ZeroDimension);
    }
    if directions.is_empty() {
        return Err(Violation::EmptyFamily);
    }
    for (index, p) in directions.iter().enumerate() {
        if p.len() != dim {
            return Err(Violation::WrongLength { index, len: p.len() });
        }
        if p.iter().any(|v| !v.is_finite()) {
            return Err(Violation::NonFinite { index });
        }
        if let Some(component) = p.iter().position(|&v| v < 0.0) {
            return Err(Violation::NegativeComponent { index, component });
        }
        if p.iter().all(|&v| v == 0.0) {
            return Err(Violation::ZeroDirection { index });
        }
    }
    Ok(())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl HyperplaneFamily {
    pub fn new(dim: usize, directions: Vec<Vec<f64>>) -> Result<Self> {
        validate(dim, &directions)?;
        Ok(Self { dim, directions })
    }

    /// Half-space `{ x : Σ w_j x_j > 1 }`.
    pub fn aggregate(weights: &[f64]) -> Result<Self> {
        Self::new(weights.len(), vec![weights.to_vec()])
    }

    /// Union `{ x : x_j > t_j for some j }` of coordinate half-spaces.
    pub fn union(thresholds: &[f64]) -> Result<Self> {
        let d = thresholds.len();
        if thresholds.iter().any(|&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidRuinSet("union thresholds must be positive".into()));
        }
        let dirs = (0..d)
            .map(|j| {
                let mut e = vec![0.0; d];
                e[j] = 1.0 / thresholds[j];
                e
            })
            .collect();
        Self::new(d, dirs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn directions(&self) -> &[Vec<f64>] {
        &self.directions
    }

    /// `Y(x) = max(0, max_k p_kᵀx)` without the dimension check.
    #[inline]
    pub fn index_of(&self, x: &[f64]) -> f64 {
        let mut y = 0.0f64;
        for p in &self.directions {
            y = y.max(dot(p, x));
        }
        y
    }

    /// Largest `p_kᵀx`, possibly negative. Used for give-up tests.
    #[inline]
    pub fn max_projection(&self, x: &[f64]) -> f64 {
        self.directions.iter().map(|p| dot(p, x)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn scale_index(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.index_of(x))
    }

    /// Whether `x ∈ uA`. The set is open, so the boundary is excluded.
    pub fn contains(&self, x: &[f64], u: f64) -> Result<bool> {
        if !(u > 0.0) {
            return Err(Error::param("level u must be positive"));
        }
        Ok(self.scale_index(x)? > u)
    }

    /// `h_θ = inf{ w > 0 : wθ ∈ A }`, infinite when the ray misses `A`.
    pub fn height(&self, theta: &[f64]) -> Result<f64> {
        check_dim(self.dim, theta.len())?;
        let sum: f64 = theta.iter().sum();
        if theta.iter().any(|&t| t < 0.0) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::param("theta must lie on the unit simplex"));
        }
        let y = self.index_of(theta);
        Ok(if y > 0.0 { 1.0 / y } else { f64::INFINITY })
    }

    /// `T⁻¹A` for an increasing linear map `T`, with directions `Tᵀp_k`.
    pub fn pullback(&self, map: &LinearMapSpec) -> Result<HyperplaneFamily> {
        check_dim(self.dim, map.rows())?;
        let d = map.cols();
        let dirs: Vec<Vec<f64>> = self
            .directions
            .iter()
            .map(|p| (0..d).map(|j| (0..map.rows()).map(|i| map.t[i][j] * p[i]).sum()).collect())
            .filter(|q: &Vec<f64>| q.iter().any(|&v| v != 0.0))
            .collect();
        if dirs.is_empty() {
            return Err(Error::Degenerate("every direction is annihilated by the map".into()));
        }
        HyperplaneFamily::new(d, dirs)
    }

    /// Length of `{ v ≥ 0 : x − v c ∈ uA }`, i.e. `max(0, max_k (p_kᵀx − u)/(p_kᵀc))`.
    pub fn excess_sojourn(&self, x: &[f64], c: &[f64], u: f64) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        check_dim(self.dim, c.len())?;
        if c.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::param("drift c must be componentwise positive"));
        }
        if !(u > 0.0) {
            return Err(Error::param("level u must be positive"));
        }
        Ok(self.sojourn_of(x, c, u))
    }

    #[inline]
    pub fn sojourn_of(&self, x: &[f64], c: &[f64], u: f64) -> f64 {
        let mut v = 0.0f64;
        for p in &self.directions {
            v = v.max((dot(p, x) - u) / dot(p, c));
        }
        v
    }

    /// Family of `λA`, i.e. directions `p_k / λ`.
    pub fn scaled(&self, lambda: f64) -> Result<HyperplaneFamily> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::param("scale factor must be positive"));
        }
        HyperplaneFamily::new(
            self.dim,
            self.directions.iter().map(|p| p.iter().map(|v| v / lambda).collect()).collect(),
        )
    }

    /// Whether direction `j` is implied by the others over all of `ℝ^d`:
    /// `max p_jᵀx s.t. p_kᵀx ≤ 1 (k ≠ j)` does not exceed 1.
    pub fn is_redundant(&self, j: usize) -> Result<bool> {
        if self.directions.len() < 2 {
            return Ok(false);
        }
        let d = self.dim;
        // x = x⁺ − x⁻ with both parts nonnegative.
        let split = |p: &[f64]| -> Vec<f64> { p.iter().copied().chain(p.iter().map(|v| -v)).collect() };
        let constraints = self
            .directions
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != j)
            .map(|(_, p)| Constraint::new(split(p), Relation::Le, 1.0))
            .collect();
        let objective = split(&self.directions[j]).iter().map(|v| -v).collect::<Vec<_>>();
        debug_assert_eq!(objective.len(), 2 * d);
        match lp::solve(&LinearProgram { objective, constraints })? {
            LpOutcome::Optimal { value, .. } => Ok(-value <= 1.0 + lp::TOL),
            LpOutcome::Unbounded => Ok(false),
            LpOutcome::Infeasible => Err(Error::Numerical("redundancy LP infeasible".into())),
        }
    }

    /// Removes redundant directions one at a time; membership is unchanged.
    pub fn pruned(&self) -> Result<HyperplaneFamily> {
        let mut fam = self.clone();
        let mut j = 0;
        while j < fam.directions.len() {
            if fam.is_redundant(j)? {
                fam.directions.remove(j);
            } else {
                j += 1;
            }
        }
        Ok(fam)
    }
}

/// An increasing linear map `T : ℝ^d → ℝ^k` (all entries nonnegative).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMapSpec {
    t: Vec<Vec<f64>>,
}

impl LinearMapSpec {
    pub fn new(t: Vec<Vec<f64>>) -> Result<Self> {
        let cols = t.first().map(Vec::len).unwrap_or(0);
        if t.is_empty() || cols == 0 {
            return Err(Error::param("linear map must be non-empty"));
        }
        if t.iter().any(|r| r.len() != cols) {
            return Err(Error::param("linear map rows differ in length"));
        }
        if t.iter().flatten().any(|&v| !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::param("linear map entries must be finite and nonnegative"));
        }
        Ok(Self { t })
    }

    pub fn identity(d: usize) -> Self {
        Self {
            t: (0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.t.len()
    }

    pub fn cols(&self) -> usize {
        self.t[0].len()
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols(), x.len())?;
        Ok(self.t.iter().map(|r| dot(r, x)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fam(dirs: &[&[f64]]) -> HyperplaneFamily {
        HyperplaneFamily::new(dirs[0].len(), dirs.iter().map(|p| p.to_vec()).collect()).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(validate(2, &[vec![0.5, 0.5]]).is_ok());
        assert!(validate(2, &[vec![1.0, 0.0], vec![0.0, 0.5]]).is_ok());
        let v = validate(2, &[vec![-1.0, 1.0]]).unwrap_err();
        assert!(v.to_string().contains("negative component"));
        assert_eq!(validate(2, &[]).unwrap_err(), Violation::EmptyFamily);
        assert_eq!(validate(2, &[vec![0.0, 0.0]]).unwrap_err(), Violation::ZeroDirection { index: 0 });
    }

    #[test]
    fn scale_index_examples() {
        assert_eq!(fam(&[&[0.5, 0.5]]).scale_index(&[3.0, 1.0]).unwrap(), 2.0);
        assert_eq!(fam(&[&[1.0, 0.0], &[0.0, 0.5]]).scale_index(&[0.5, 3.0]).unwrap(), 1.5);
        assert_eq!(fam(&[&[1.0, 0.0], &[0.0, 0.5]]).scale_index(&[0.0, 0.0]).unwrap(), 0.0);
        assert!(fam(&[&[1.0, 0.0]]).scale_index(&[1.0]).is_err());
    }

    #[test]
    fn membership_examples() {
        let f = fam(&[&[0.5, 0.5]]);
        assert!(f.contains(&[2.0, 2.0], 1.0).unwrap());
        assert!(!f.contains(&[2.0, 2.0], 2.0).unwrap());
        assert!(!f.contains(&[6.0, 6.0], 6.0).unwrap());
        assert!(f.contains(&[6.0, 6.0], 5.9).unwrap());
        assert!(f.contains(&[6.0, 6.0], 0.0).is_err());
    }

    #[test]
    fn height_examples() {
        assert_eq!(fam(&[&[0.5, 0.5]]).height(&[0.5, 0.5]).unwrap(), 2.0);
        assert_eq!(fam(&[&[1.0, 0.0], &[0.0, 0.5]]).height(&[0.0, 1.0]).unwrap(), 2.0);
        assert_eq!(fam(&[&[1.0, 0.0]]).height(&[0.0, 1.0]).unwrap(), f64::INFINITY);
        assert!(fam(&[&[1.0, 0.0]]).height(&[0.5, 0.6]).is_err());
    }

    #[test]
    fn pullback_examples() {
        let f = fam(&[&[0.5, 0.5]]);
        assert_eq!(f.pullback(&LinearMapSpec::identity(2)).unwrap(), f);
        let sum = fam(&[&[1.0]]).pullback(&LinearMapSpec::new(vec![vec![1.0, 1.0]]).unwrap()).unwrap();
        assert_eq!(sum.directions(), &[vec![1.0, 1.0]]);
        let t = LinearMapSpec::new(vec![vec![2.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(f.pullback(&t).unwrap().directions(), &[vec![1.0, 0.0]]);
        let zero = LinearMapSpec::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(f.pullback(&zero).is_err());
    }

    #[test]
    fn sojourn_examples() {
        let f = fam(&[&[0.5, 0.5]]);
        assert_eq!(f.excess_sojourn(&[6.0, 2.0], &[1.0, 1.0], 2.0).unwrap(), 2.0);
        assert_eq!(f.excess_sojourn(&[1.0, 1.0], &[1.0, 1.0], 2.0).unwrap(), 0.0);
        let g = fam(&[&[1.0, 0.0], &[0.0, 0.5]]);
        assert_eq!(g.excess_sojourn(&[5.0, 8.0], &[1.0, 2.0], 3.0).unwrap(), 2.0);
        assert!(g.excess_sojourn(&[5.0, 8.0], &[1.0, 0.0], 3.0).is_err());
    }

    #[test]
    fn sojourn_matches_scan() {
        let g = fam(&[&[1.0, 0.0], &[0.0, 0.5]]);
        let (x, c, u) = ([5.0, 8.0], [1.0, 2.0], 3.0);
        let step = 1e-4;
        let hits = (0..100_000)
            .filter(|i| {
                let v = (*i as f64 + 0.5) * step;
                g.index_of(&[x[0] - v * c[0], x[1] - v * c[1]]) > u
            })
            .count();
        assert!((hits as f64 * step - 2.0).abs() < 2.0 * step);
    }

    #[test]
    fn pruning_drops_dominated_directions() {
        let f = fam(&[&[1.0, 0.0], &[0.5, 0.0], &[0.0, 1.0]]);
        let p = f.pruned().unwrap();
        assert_eq!(p.directions(), &[vec![1.0, 0.0], vec![0.0, 1.0]]);
        // A convex combination of two directions is implied by them.
        let g = fam(&[&[1.0, 0.0], &[0.0, 1.0], &[0.5, 0.5]]);
        assert_eq!(g.pruned().unwrap().directions().len(), 2);
        // Nothing to prune in the bid-ask family.
        let h = fam(&[&[1.0 / 3.0, 2.0 / 3.0], &[2.0 / 3.0, 1.0 / 3.0]]);
        assert_eq!(h.pruned().unwrap(), h);
    }
}
