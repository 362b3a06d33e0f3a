//! Small statistical helpers shared by the estimators.

use statrs::distribution::{ContinuousCDF, Normal};

/// Two-sided standard normal quantile for confidence `level`, e.g. 1.96 at 0.95.
pub fn z_for_level(level: f64) -> f64 {
    let n = Normal::new(0.0, 1.0).expect("standard normal");
    n.inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Binomial standard error of `k / n`.
pub fn binomial_stderr(k: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::NAN;
    }
    let p = k as f64 / n as f64;
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Confidence interval for `p1 / p2` from independent binomial counts, by the
/// delta method on the log scale. Zero counts yield an unbounded interval.
pub fn ratio_ci(k1: u64, n1: u64, k2: u64, n2: u64, z: f64) -> (f64, f64, f64) {
    let p1 = k1 as f64 / n1 as f64;
    let p2 = k2 as f64 / n2 as f64;
    let r = p1 / p2;
    if k1 == 0 || k2 == 0 {
        return (r, 0.0, f64::INFINITY);
    }
    let var = (1.0 - p1) / k1 as f64 + (1.0 - p2) / k2 as f64;
    let half = z * var.sqrt();
    (r, r * (-half).exp(), r * half.exp())
}

/// Streaming mean and variance (Welford) that merges associatively.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    m2: f64,
    pub max: f64,
    pub sum: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
        self.sum += x;
        if x > self.max {
            self.max = x;
        }
    }

    pub fn merge(self, o: Moments) -> Moments {
        if self.n == 0 {
            return o;
        }
        if o.n == 0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        let mean = self.mean + d * o.n as f64 / n as f64;
        let m2 = self.m2 + o.m2 + d * d * (self.n as f64) * (o.n as f64) / n as f64;
        Moments {
            n,
            mean,
            m2,
            max: self.max.max(o.max),
            sum: self.sum + o.sum,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn stderr(&self) -> f64 {
        if self.n == 0 {
            f64::NAN
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

/// Median of the block means, with a spread-based standard error: the
/// normal-approximation stderr of a median of `k` means is
/// `sqrt(pi/2) * sd(block means) / sqrt(k)`.
pub fn median_of_means(block_means: &[f64]) -> (f64, f64) {
    let k = block_means.len();
    if k == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut v = block_means.to_vec();
    v.sort_by(f64::total_cmp);
    let med = if k % 2 == 1 {
        v[k / 2]
    } else {
        0.5 * (v[k / 2 - 1] + v[k / 2])
    };
    let mean = v.iter().sum::<f64>() / k as f64;
    let sd = if k > 1 {
        (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k - 1) as f64).sqrt()
    } else {
        0.0
    };
    (med, (std::f64::consts::PI / 2.0).sqrt() * sd / (k as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn z_at_95_percent() {
        assert!((z_for_level(0.95) - 1.959963984540054).abs() < 1e-9);
    }

    #[test]
    fn wilson_brackets_estimate() {
        let (lo, hi) = wilson(30, 100, 1.96);
        assert!(lo < 0.3 && 0.3 < hi);
        // Reference values from the closed form.
        assert!((lo - 0.219_01).abs() < 1e-4, "{lo}");
        assert!((hi - 0.395_85).abs() < 1e-4, "{hi}");
        let (lo0, hi0) = wilson(0, 100, 1.96);
        assert_eq!(lo0, 0.0);
        assert!(hi0 > 0.0);
    }

    #[test]
    fn moments_merge_matches_single_pass() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let m = a.merge(b);
        assert_eq!(m.n, all.n);
        assert!((m.mean - all.mean).abs() < 1e-12);
        assert!((m.variance() - all.variance()).abs() < 1e-9);
        assert_eq!(m.max, all.max);
    }

    #[test]
    fn median_of_means_odd_even() {
        assert_eq!(median_of_means(&[3.0, 1.0, 2.0]).0, 2.0);
        assert_eq!(median_of_means(&[4.0, 1.0, 2.0, 3.0]).0, 2.5);
    }
}
