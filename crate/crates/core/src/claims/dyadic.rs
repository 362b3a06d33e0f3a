//! Mass spread uniformly over the dyadic simplices `{x + y = 2ⁿ}`.
//!
//! `N` has `P(N = n) = 2^-(n+1)`, `U` is uniform on `[0, 1]`, and the claim
//! is `(U 2ᴺ, (1 − U) 2ᴺ)`. Each marginal is subexponential while the sum
//! `X + Y = 2ᴺ` is not even long-tailed.

use rand::Rng;

use crate::ruinsets::HyperplaneFamily;
use crate::{Error, Result};

/// Levels beyond this contribute less than `2^-200` of mass.
const MAX_LEVEL: i32 = 200;

/// Exact `P(X > x)`: `2^-(n+1) − (x/3) 2^-(2n+1)` with `n = ⌊log₂ x⌋` for
/// `x ≥ 1`, and `1 − 2x/3` on `[0, 1)`.
pub fn crnonlin_survival(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::param("survival argument must be nonnegative"));
    }
    if x < 1.0 {
        return Ok(1.0 - 2.0 * x / 3.0);
    }
    let n = level(x);
    Ok((-(n + 1) as f64).exp2() - x / 3.0 * (-(2 * n + 1) as f64).exp2())
}

/// Exact `P(X + Y > x)`: 1 below 1 and `2^-(n+1)` on `[2ⁿ, 2ⁿ⁺¹)`.
pub fn crnonlin_sum_survival(x: f64) -> Result<f64> {
    if !(x >= 0.0) {
        return Err(Error::param("survival argument must be nonnegative"));
    }
    if x < 1.0 {
        return Ok(1.0);
    }
    Ok((-(level(x) + 1) as f64).exp2())
}

/// `⌊log₂ x⌋` for `x ≥ 1`, exact at powers of two.
fn level(x: f64) -> i32 {
    let mut n = x.log2().floor() as i32;
    while (n as f64).exp2() > x {
        n -= 1;
    }
    while ((n + 1) as f64).exp2() <= x {
        n += 1;
    }
    n
}

pub(crate) fn sample<R: Rng + ?Sized>(rng: &mut R, out: &mut [f64]) {
    let n = rng.random::<u64>().trailing_zeros();
    let u: f64 = rng.random();
    let s = (n as f64).exp2();
    out[0] = u * s;
    out[1] = (1.0 - u) * s;
}

pub(crate) fn joint_survival(x: f64, y: f64) -> f64 {
    let (x, y) = (x.max(0.0), y.max(0.0));
    (0..=MAX_LEVEL)
        .map(|n| {
            let s = (n as f64).exp2();
            (-(n + 1) as f64).exp2() * (1.0 - (x + y) / s).max(0.0)
        })
        .sum()
}

/// `P(Y(X) > t)` for any two-dimensional family: on level `n` the scale
/// index is convex in `U`, so its sublevel set is an interval.
pub(crate) fn scalar_survival(family: &HyperplaneFamily, t: f64) -> f64 {
    if t < 0.0 {
        return 1.0;
    }
    let mut total = 0.0;
    for n in 0..=MAX_LEVEL {
        let s = t / (n as f64).exp2();
        // p₂ + (p₁ − p₂) U ≤ s for every direction.
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for p in family.directions() {
            let (a, b) = (p[0] - p[1], p[1]);
            if a > 0.0 {
                hi = hi.min((s - b) / a);
            } else if a < 0.0 {
                lo = lo.max((s - b) / a);
            } else if b > s {
                hi = -1.0;
            }
        }
        let inside = (hi - lo).max(0.0);
        total += (-(n + 1) as f64).exp2() * (1.0 - inside);
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values() {
        assert!((crnonlin_survival(1.0).unwrap() - 1.0 / 3.0).abs() < 1e-16);
        assert!((crnonlin_survival(2.0).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((crnonlin_survival(8.0).unwrap() - 1.0 / 24.0).abs() < 1e-16);
        assert!(crnonlin_survival(-1.0).is_err());
        for n in 1..=10 {
            let a = crnonlin_sum_survival((n as f64).exp2()).unwrap();
            let b = crnonlin_sum_survival((n as f64).exp2() - 1.0).unwrap();
            assert_eq!(a / b, 0.5);
        }
    }

    #[test]
    fn marginal_is_continuous_at_powers_of_two() {
        for n in 0..30 {
            let x = (n as f64).exp2();
            let left = crnonlin_survival(x * (1.0 - 1e-12)).unwrap();
            let right = crnonlin_survival(x).unwrap();
            assert!((left - right).abs() < 1e-9 * right, "n={n}");
        }
    }

    #[test]
    fn joint_survival_marginal_agree() {
        for x in [0.0, 0.3, 1.0, 1.7, 5.0, 100.0] {
            assert!((joint_survival(x, 0.0) - crnonlin_survival(x).unwrap()).abs() < 1e-14);
        }
    }

    #[test]
    fn aggregate_scalarization_is_sum_law() {
        let f = HyperplaneFamily::aggregate(&[0.5, 0.5]).unwrap();
        for t in [0.1, 0.5, 0.75, 1.0, 3.0, 17.0] {
            let exact = crnonlin_sum_survival(2.0 * t).unwrap();
            assert!((scalar_survival(&f, t) - exact).abs() < 1e-14, "t={t}");
        }
        let g = HyperplaneFamily::new(2, vec![vec![1.0, 0.0]]).unwrap();
        for t in [0.5, 1.0, 3.0, 100.0] {
            assert!((scalar_survival(&g, t) - crnonlin_survival(t).unwrap()).abs() < 1e-14);
        }
    }
}
