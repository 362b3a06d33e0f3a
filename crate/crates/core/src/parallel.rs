use rayon::prelude::*;

use crate::rng::RngStream;

/// Samples per block. Block `b` always draws from `stream.split(b)`, so the
/// result does not depend on how blocks are scheduled.
pub(crate) const BLOCK: u64 = 1 << 15;

/// Runs `f(block_stream, len)` over consecutive blocks covering `n` draws and
/// returns the per-block results in block order.
pub(crate) fn map_blocks<T, F>(n: u64, stream: RngStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RngStream, usize) -> T + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK.min(n - b * BLOCK) as usize;
            f(stream.split(b), len)
        })
        .collect()
}

/// Like [`map_blocks`] but also passes the global index of the block's
/// first draw.
pub(crate) fn map_blocks_at<T, F>(n: u64, stream: RngStream, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(RngStream, u64, usize) -> T + Sync + Send,
{
    let blocks = n.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let len = BLOCK.min(n - b * BLOCK) as usize;
            f(stream.split(b), b * BLOCK, len)
        })
        .collect()
}

/// `hist[k]` counts values exceeding exactly the first `k` levels.
pub(crate) fn bucket(levels: &[f64], value: f64) -> usize {
    levels.partition_point(|&l| l < value)
}

/// Converts a bucket histogram into exceedance counts per level.
pub(crate) fn exceedances(hist: &[u64]) -> Vec<u64> {
    let levels = hist.len() - 1;
    let mut out = vec![0u64; levels];
    let mut acc = 0u64;
    for j in (0..levels).rev() {
        acc += hist[j + 1];
        out[j] = acc;
    }
    out
}

pub(crate) fn merge_hist(mut a: Vec<u64>, b: Vec<u64>) -> Vec<u64> {
    for (x, y) in a.iter_mut().zip(b) {
        *x += y;
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceedance_counts_match_direct_count() {
        let levels = [1.0, 2.0, 3.0];
        let values = [0.5, 1.0, 1.5, 2.5, 3.0, 3.5, 10.0];
        let mut hist = vec![0u64; levels.len() + 1];
        for &v in &values {
            hist[bucket(&levels, v)] += 1;
        }
        let counts = exceedances(&hist);
        for (j, &l) in levels.iter().enumerate() {
            let direct = values.iter().filter(|&&v| v > l).count() as u64;
            assert_eq!(counts[j], direct);
        }
    }
}
