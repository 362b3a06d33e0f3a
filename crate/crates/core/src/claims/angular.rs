use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One point mass of an angular measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    pub theta: Vec<f64>,
    pub weight: f64,
}

/// A finite measure on the unit simplex `Δ_d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum AngularMeasure {
    Atoms { atoms: Vec<Atom> },
    /// Uniform probability on `Δ_d`.
    Uniform { dim: usize },
    /// Dirichlet probability with the given concentrations.
    Dirichlet { alpha: Vec<f64> },
}

const SIMPLEX_TOL: f64 = 1e-12;

impl AngularMeasure {
    pub fn atoms(atoms: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        let m = AngularMeasure::Atoms {
            atoms: atoms.into_iter().map(|(theta, weight)| Atom { theta, weight }).collect(),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            AngularMeasure::Atoms { atoms } => {
                let d = atoms.first().map(|a| a.theta.len()).ok_or_else(|| Error::param("angular measure needs atoms"))?;
                for a in atoms {
                    if a.theta.len() != d {
                        return Err(Error::DimensionMismatch { expected: d, got: a.theta.len() });
                    }
                    let s: f64 = a.theta.iter().sum();
                    if a.theta.iter().any(|&t| t < 0.0) || (s - 1.0).abs() > SIMPLEX_TOL {
                        return Err(Error::param("angular atoms must lie on the unit simplex"));
                    }
                    if !(a.weight > 0.0) || !a.weight.is_finite() {
                        return Err(Error::param("angular atom weights must be positive"));
                    }
                }
                Ok(())
            }
            AngularMeasure::Uniform { dim } => {
                if *dim == 0 {
                    Err(Error::param("angular dimension must be positive"))
                } else {
                    Ok(())
                }
            }
            AngularMeasure::Dirichlet { alpha } => {
                if alpha.is_empty() || alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
                    Err(Error::param("dirichlet concentrations must be positive"))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AngularMeasure::Atoms { atoms } => atoms.first().map(|a| a.theta.len()).unwrap_or(0),
            AngularMeasure::Uniform { dim } => *dim,
            AngularMeasure::Dirichlet { alpha } => alpha.len(),
        }
    }

    /// `σ(Δ_d)`.
    pub fn total_mass(&self) -> f64 {
        match self {
            AngularMeasure::Atoms { atoms } => atoms.iter().map(|a| a.weight).sum(),
            _ => 1.0,
        }
    }

    /// Same measure scaled to total mass one.
    pub fn normalized(&self) -> AngularMeasure {
        match self {
            AngularMeasure::Atoms { atoms } => {
                let m = self.total_mass();
                AngularMeasure::Atoms {
                    atoms: atoms.iter().map(|a| Atom { theta: a.theta.clone(), weight: a.weight / m }).collect(),
                }
            }
            other => other.clone(),
        }
    }

    fn concentrations(&self) -> Option<Vec<f64>> {
        match self {
            AngularMeasure::Uniform { dim } => Some(vec![1.0; *dim]),
            AngularMeasure::Dirichlet { alpha } => Some(alpha.clone()),
            AngularMeasure::Atoms { .. } => None,
        }
    }

    /// Draws from the normalized measure into `out`.
    pub fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match self {
            AngularMeasure::Atoms { atoms } => {
                let target = rng.random::<f64>() * self.total_mass();
                let mut acc = 0.0;
                let mut chosen = &atoms[atoms.len() - 1];
                for a in atoms {
                    acc += a.weight;
                    if target < acc {
                        chosen = a;
                        break;
                    }
                }
                out.copy_from_slice(&chosen.theta);
            }
            _ => {
                let conc = self.concentrations().expect("continuous family");
                let mut sum = 0.0;
                for (o, &a) in out.iter_mut().zip(&conc) {
                    *o = if a == 1.0 {
                        -(1.0 - rng.random::<f64>()).ln()
                    } else {
                        Gamma::new(a, 1.0).expect("validated").sample(rng)
                    };
                    sum += *o;
                }
                for o in out.iter_mut() {
                    *o /= sum;
                }
            }
        }
    }

    /// `E[θ_j]` under the normalized measure.
    pub fn mean(&self) -> Vec<f64> {
        match self {
            AngularMeasure::Atoms { atoms } => {
                let m = self.total_mass();
                let d = self.dim();
                let mut out = vec![0.0; d];
                for a in atoms {
                    for j in 0..d {
                        out[j] += a.weight * a.theta[j] / m;
                    }
                }
                out
            }
            _ => {
                let c = self.concentrations().expect("continuous family");
                let s: f64 = c.iter().sum();
                c.iter().map(|a| a / s).collect()
            }
        }
    }

    /// `E[θ_j θ_k]` under the normalized measure.
    pub fn second_moments(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        match self {
            AngularMeasure::Atoms { atoms } => {
                let m = self.total_mass();
                let mut out = vec![vec![0.0; d]; d];
                for a in atoms {
                    for j in 0..d {
                        for k in 0..d {
                            out[j][k] += a.weight * a.theta[j] * a.theta[k] / m;
                        }
                    }
                }
                out
            }
            _ => {
                let c = self.concentrations().expect("continuous family");
                let s: f64 = c.iter().sum();
                (0..d)
                    .map(|j| {
                        (0..d)
                            .map(|k| c[j] * (c[k] + if j == k { 1.0 } else { 0.0 }) / (s * (s + 1.0)))
                            .collect()
                    })
                    .collect()
            }
        }
    }

    /// Atoms as `(θ, weight)` pairs when the measure is discrete.
    pub fn atom_list(&self) -> Option<&[Atom]> {
        match self {
            AngularMeasure::Atoms { atoms } => Some(atoms),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn atoms_validated() {
        assert!(AngularMeasure::atoms(vec![(vec![0.5, 0.5], 1.0)]).is_ok());
        assert!(AngularMeasure::atoms(vec![(vec![0.5, 0.6], 1.0)]).is_err());
        assert!(AngularMeasure::atoms(vec![(vec![0.5, 0.5], 0.0)]).is_err());
    }

    #[test]
    fn dirichlet_moments_match_samples() {
        let m = AngularMeasure::Dirichlet { alpha: vec![0.5, 2.0, 1.0] };
        let mut rng = RngStream::new(9, 0).rng();
        let n = 100_000;
        let mut acc = [0.0; 3];
        let mut x = [0.0; 3];
        for _ in 0..n {
            m.sample_into(&mut rng, &mut x);
            assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for j in 0..3 {
                acc[j] += x[j];
            }
        }
        let mean = m.mean();
        let sm = m.second_moments();
        for j in 0..3 {
            let sd = (sm[j][j] - mean[j] * mean[j]).sqrt();
            assert!((acc[j] / n as f64 - mean[j]).abs() < 4.0 * sd / (n as f64).sqrt());
        }
    }
}
