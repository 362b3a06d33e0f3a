use serde::{Deserialize, Serialize};

use super::{BidAskSpec, HyperplaneFamily, RuinSet};
use crate::Result;

/// JSON form of a ruin set.
///
/// ```json
/// {"type": "hyperplanes", "directions": [[0.5, 0.5]]}
/// {"type": "bidask", "pi": [[1, 2], [2, 1]], "b": [0.5, 0.5]}
/// {"type": "aggregate", "weights": [1, 1], "threshold": 2}
/// {"type": "union", "thresholds": [1, 1]}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum RuinSetDescriptor {
    Hyperplanes {
        directions: Vec<Vec<f64>>,
    },
    Bidask {
        pi: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
    /// `{ x : Σ a_j x_j > threshold }`.
    Aggregate {
        weights: Vec<f64>,
        #[serde(default = "one")]
        threshold: f64,
    },
    /// `{ x : x_j > t_j for some j }`.
    Union {
        thresholds: Vec<f64>,
    },
}

fn one() -> f64 {
    1.0
}

impl RuinSetDescriptor {
    pub fn build(&self) -> Result<RuinSet> {
        match self {
            RuinSetDescriptor::Hyperplanes { directions } => {
                let d = directions.first().map(Vec::len).unwrap_or(0);
                Ok(HyperplaneFamily::new(d, directions.clone())?.into())
            }
            RuinSetDescriptor::Bidask { pi, b } => RuinSet::from_bidask(BidAskSpec::new(pi.clone(), b.clone())?),
            RuinSetDescriptor::Aggregate { weights, threshold } => {
                if !(*threshold > 0.0) {
                    return Err(crate::Error::InvalidRuinSet("aggregate threshold must be positive".into()));
                }
                let w: Vec<f64> = weights.iter().map(|a| a / threshold).collect();
                Ok(HyperplaneFamily::aggregate(&w)?.into())
            }
            RuinSetDescriptor::Union { thresholds } => Ok(HyperplaneFamily::union(thresholds)?.into()),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            RuinSetDescriptor::Hyperplanes { directions } => directions.first().map(Vec::len).unwrap_or(0),
            RuinSetDescriptor::Bidask { b, .. } => b.len(),
            RuinSetDescriptor::Aggregate { weights, .. } => weights.len(),
            RuinSetDescriptor::Union { thresholds } => thresholds.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> RuinSet {
        serde_json::from_str::<RuinSetDescriptor>(s).unwrap().build().unwrap()
    }

    #[test]
    fn sugar_forms() {
        let a = parse(r#"{"type":"aggregate","weights":[1,1],"threshold":2}"#);
        assert_eq!(a.family().unwrap().directions(), &[vec![0.5, 0.5]]);
        let u = parse(r#"{"type":"union","thresholds":[1,2]}"#);
        assert_eq!(u.family().unwrap().directions(), &[vec![1.0, 0.0], vec![0.0, 0.5]]);
        let b = parse(r#"{"type":"bidask","pi":[[1,2],[2,1]],"b":[1,1]}"#);
        assert_eq!(b.family().unwrap().directions().len(), 2);
    }

    #[test]
    fn high_dimensional_bidask_uses_lp() {
        let pi = vec![vec![1.0, 1.5, 1.5, 1.5]; 4]
            .into_iter()
            .enumerate()
            .map(|(i, mut r)| {
                r[i] = 1.0;
                r
            })
            .collect();
        let d = RuinSetDescriptor::Bidask { pi, b: vec![0.25; 4] };
        assert!(matches!(d.build().unwrap(), RuinSet::Cone(_)));
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(serde_json::from_str::<RuinSetDescriptor>(r#"{"type":"union","thresholds":[1],"x":1}"#).is_err());
    }
}
