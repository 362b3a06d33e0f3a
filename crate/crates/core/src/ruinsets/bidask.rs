use serde::{Deserialize, Serialize};

use super::family::HyperplaneFamily;
use crate::lp::{self, Constraint, LinearProgram, LpOutcome, Relation};
use crate::{Error, Result};

/// Proportional transfer costs between `d` business lines together with the
/// initial capital allocation `b`.
///
/// The solvency cone is `C = cone{ π_ij e^i − e^j (i ≠ j), e^i }` and the
/// ruin set is `A = b − L` with `L = ℝ^d \ C`, so that `x ∈ uA` exactly when
/// `ub − x ∉ C`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BidAskSpec {
    pi: Vec<Vec<f64>>,
    b: Vec<f64>,
}

const RATE_TOL: f64 = 1e-12;

impl BidAskSpec {
    pub fn new(pi: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let d = pi.len();
        if d == 0 {
            return Err(Error::InvalidBidAsk("empty matrix".into()));
        }
        if pi.iter().any(|r| r.len() != d) {
            return Err(Error::InvalidBidAsk("matrix must be square".into()));
        }
        if b.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: b.len() });
        }
        if pi.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBidAsk("entries must be finite".into()));
        }
        for i in 0..d {
            for j in 0..d {
                if pi[i][j] < 1.0 - RATE_TOL {
                    return Err(Error::InvalidBidAsk(format!(
                        "constraint (i) pi_ij >= 1 fails at ({}, {}): {}",
                        i + 1,
                        j + 1,
                        pi[i][j]
                    )));
                }
            }
            if (pi[i][i] - 1.0).abs() > RATE_TOL {
                return Err(Error::InvalidBidAsk(format!(
                    "constraint (ii) pi_ii = 1 fails at ({0}, {0}): {1}",
                    i + 1,
                    pi[i][i]
                )));
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if pi[i][j] > pi[i][k] * pi[k][j] * (1.0 + RATE_TOL) {
                        return Err(Error::InvalidBidAsk(format!(
                            "constraint (iii) pi_ij <= pi_ik pi_kj fails at (i, j, k) = ({}, {}, {})",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        if b.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidBidAsk("allocation b must be positive".into()));
        }
        Ok(Self { pi, b })
    }

    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn pi(&self) -> &[Vec<f64>] {
        &self.pi
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    /// Cone generators, transfers first and then the unit vectors.
    pub fn generators(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        let mut g = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    let mut v = vec![0.0; d];
                    v[i] = self.pi[i][j];
                    v[j] = -1.0;
                    g.push(v);
                }
            }
        }
        for i in 0..d {
            let mut v = vec![0.0; d];
            v[i] = 1.0;
            g.push(v);
        }
        g
    }

    /// Whether `z` lies in the solvency cone, by LP feasibility of `Gλ = z, λ ≥ 0`.
    pub fn cone_contains(&self, z: &[f64]) -> Result<bool> {
        crate::error::check_dim(self.dim(), z.len())?;
        let g = self.generators();
        let constraints = (0..self.dim())
            .map(|i| Constraint::new(g.iter().map(|v| v[i]).collect(), Relation::Eq, z[i]))
            .collect();
        let lp = LinearProgram { objective: vec![0.0; g.len()], constraints };
        Ok(lp::solve(&lp)?.is_feasible())
    }

    /// `min { t ∈ ℝ : t·a + base − x ∈ C }` with `(a, base) = (b, 0)` for the
    /// scale index and `(c, ub)` for the sojourn. The cone contains the open
    /// orthant, so the program is always feasible and bounded below.
    fn lp_min(&self, x: &[f64], shift: Option<(&[f64], f64)>) -> Result<f64> {
        let d = self.dim();
        let g = self.generators();
        let (a, base): (Vec<f64>, Vec<f64>) = match shift {
            None => (self.b.clone(), vec![0.0; d]),
            Some((c, u)) => (c.to_vec(), self.b.iter().map(|bi| u * bi).collect()),
        };
        // Columns: t⁺, t⁻, λ_1..λ_m.
        let constraints = (0..d)
            .map(|i| {
                let mut row = Vec::with_capacity(g.len() + 2);
                row.push(a[i]);
                row.push(-a[i]);
                row.extend(g.iter().map(|v| -v[i]));
                Constraint::new(row, Relation::Eq, x[i] - base[i])
            })
            .collect();
        let mut objective = vec![0.0; g.len() + 2];
        objective[0] = 1.0;
        objective[1] = -1.0;
        match lp::solve(&LinearProgram { objective, constraints })? {
            LpOutcome::Optimal { x, .. } => Ok(x[0] - x[1]),
            other => Err(Error::Numerical(format!("cone LP returned {other:?}"))),
        }
    }

    /// `max_k p_kᵀx` over the (implicit) dual rays, possibly negative.
    pub fn lp_max_projection(&self, x: &[f64]) -> Result<f64> {
        crate::error::check_dim(self.dim(), x.len())?;
        self.lp_min(x, None)
    }

    /// Scale index `max(0, min{ u : ub − x ∈ C })` computed by LP.
    pub fn lp_scale_index(&self, x: &[f64]) -> Result<f64> {
        Ok(self.lp_max_projection(x)?.max(0.0))
    }

    /// Excess sojourn `min{ v ≥ 0 : ub + vc − x ∈ C }` computed by LP.
    pub fn lp_sojourn(&self, x: &[f64], c: &[f64], u: f64) -> Result<f64> {
        crate::error::check_dim(self.dim(), x.len())?;
        crate::error::check_dim(self.dim(), c.len())?;
        Ok(self.lp_min(x, Some((c, u)))?.max(0.0))
    }
}

/// Largest dimension for which [`compile_bidask`] enumerates dual rays.
pub const MAX_ENUM_DIM: usize = 3;

/// Supporting directions of `A = b − L`: the extreme rays of the dual cone
/// `C* = { p : gᵀp ≥ 0 for every generator g }`, normalized to `pᵀb = 1`.
///
/// Rays are found by taking every `(d−1)`-subset of generators, forming the
/// orthogonal direction (both signs) and keeping those inside `C*`.
pub fn compile_bidask(spec: &BidAskSpec) -> Result<HyperplaneFamily> {
    let d = spec.dim();
    if d > MAX_ENUM_DIM {
        return Err(Error::Unsupported(format!(
            "dual-ray enumeration is limited to d <= {MAX_ENUM_DIM}; use the LP ruin set for d = {d}"
        )));
    }
    let g = spec.generators();
    let mut candidates: Vec<Vec<f64>> = Vec::new();
    match d {
        1 => candidates.push(vec![1.0]),
        2 => {
            for v in &g {
                candidates.push(vec![-v[1], v[0]]);
            }
        }
        _ => {
            for i in 0..g.len() {
                for j in (i + 1)..g.len() {
                    candidates.push(cross(&g[i], &g[j]));
                }
            }
        }
    }
    let mut rays: Vec<Vec<f64>> = Vec::new();
    for cand in candidates {
        let norm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }
        for sign in [1.0, -1.0] {
            let p: Vec<f64> = cand.iter().map(|v| sign * v / norm).collect();
            let feasible = g.iter().all(|gv| {
                let gn = gv.iter().map(|v| v * v).sum::<f64>().sqrt();
                dot(gv, &p) >= -1e-12 * gn
            });
            if !feasible {
                continue;
            }
            let pb = dot(&p, spec.b());
            if pb <= 0.0 {
                continue;
            }
            let q: Vec<f64> = p.iter().map(|v| (v / pb).max(0.0)).collect();
            let dup = rays
                .iter()
                .any(|r| r.iter().zip(&q).all(|(a, b)| (a - b).abs() <= 1e-10 * (1.0 + a.abs())));
            if !dup {
                rays.push(q);
            }
        }
    }
    if rays.is_empty() {
        return Err(Error::Degenerate("dual cone has no strictly positive direction".into()));
    }
    rays.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    HyperplaneFamily::new(d, rays)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cross(a: &[f64], b: &[f64]) -> Vec<f64> {
    vec![a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn free_transfers_give_aggregate_set() {
        let s = BidAskSpec::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]], vec![0.5, 0.5]).unwrap();
        let f = compile_bidask(&s).unwrap();
        assert_eq!(f.directions().len(), 1);
        assert!(close(&f.directions()[0], &[1.0, 1.0], 1e-12));
    }

    #[test]
    fn rate_two() {
        let s = BidAskSpec::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![1.0, 1.0]).unwrap();
        let f = compile_bidask(&s).unwrap();
        assert_eq!(f.directions().len(), 2);
        assert!(close(&f.directions()[0], &[1.0 / 3.0, 2.0 / 3.0], 1e-12));
        assert!(close(&f.directions()[1], &[2.0 / 3.0, 1.0 / 3.0], 1e-12));
    }

    #[test]
    fn prohibitive_rates_give_union_set() {
        let s = BidAskSpec::new(vec![vec![1.0, 1e6], vec![1e6, 1.0]], vec![0.5, 0.5]).unwrap();
        let f = compile_bidask(&s).unwrap();
        assert_eq!(f.directions().len(), 2);
        assert!(close(&f.directions()[0], &[0.0, 2.0], 1e-5));
        assert!(close(&f.directions()[1], &[2.0, 0.0], 1e-5));
    }

    #[test]
    fn constraint_violations_are_named() {
        let e = BidAskSpec::new(vec![vec![1.0, 0.5], vec![2.0, 1.0]], vec![0.5, 0.5]).unwrap_err();
        assert!(e.to_string().contains("constraint (i)"), "{e}");
        let e = BidAskSpec::new(vec![vec![2.0, 2.0], vec![2.0, 1.0]], vec![0.5, 0.5]).unwrap_err();
        assert!(e.to_string().contains("constraint (ii)"), "{e}");
        let pi = vec![vec![1.0, 5.0, 1.5], vec![1.5, 1.0, 1.5], vec![1.5, 1.5, 1.0]];
        let e = BidAskSpec::new(pi, vec![0.3, 0.3, 0.4]).unwrap_err();
        assert!(e.to_string().contains("constraint (iii)"), "{e}");
    }

    #[test]
    fn lp_scale_index_matches_family() {
        let s = BidAskSpec::new(
            vec![vec![1.0, 1.3, 1.6], vec![1.2, 1.0, 1.4], vec![1.5, 1.25, 1.0]],
            vec![0.2, 0.3, 0.5],
        )
        .unwrap();
        let f = compile_bidask(&s).unwrap();
        for x in [[1.0, 2.0, 0.5], [-1.0, 3.0, 0.2], [0.1, 0.1, 0.1], [-1.0, -1.0, -1.0], [5.0, -2.0, 1.0]] {
            let a = f.index_of(&x);
            let b = s.lp_scale_index(&x).unwrap();
            assert!((a - b).abs() < 1e-9, "{x:?}: {a} vs {b}");
            let m = s.lp_max_projection(&x).unwrap();
            assert!((f.max_projection(&x) - m).abs() < 1e-9);
        }
        let c = [0.5, 1.0, 2.0];
        for x in [[1.0, 2.0, 0.5], [4.0, 3.0, 0.2]] {
            let a = f.sojourn_of(&x, &c, 0.7);
            let b = s.lp_sojourn(&x, &c, 0.7).unwrap();
            assert!((a - b).abs() < 1e-9, "{x:?}: {a} vs {b}");
        }
    }

    #[test]
    fn cone_membership_basics() {
        let s = BidAskSpec::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]], vec![1.0, 1.0]).unwrap();
        assert!(s.cone_contains(&[1.0, 0.0]).unwrap());
        assert!(s.cone_contains(&[2.0, -1.0]).unwrap());
        assert!(!s.cone_contains(&[1.0, -1.0]).unwrap());
        assert!(!s.cone_contains(&[-0.1, 0.0]).unwrap());
    }
}
