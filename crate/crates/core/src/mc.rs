//! Deterministic block-parallel Monte Carlo.
//!
//! Samples are split into fixed blocks of [`BLOCK`] draws. Block `b` draws
//! from a ChaCha8 stream keyed by `(seed, b)`, so every sample is a pure
//! function of the seed and its index. Partial results are merged in block
//! order, which makes the output independent of how many workers ran.

use crate::error::{param, Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const BLOCK: u64 = 4096;

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

/// Generator for block `block` of a run seeded with `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Running sums of a fixed number of per-sample statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub sum: Vec<f64>,
    pub sum_sq: Vec<f64>,
}

impl Moments {
    pub fn new(k: usize) -> Self {
        Moments {
            n: 0,
            sum: vec![0.0; k],
            sum_sq: vec![0.0; k],
        }
    }

    #[inline]
    pub fn push(&mut self, xs: &[f64]) {
        self.n += 1;
        for (i, &x) in xs.iter().enumerate() {
            self.sum[i] += x;
            self.sum_sq[i] += x * x;
        }
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
    }

    pub fn mean(&self, i: usize) -> f64 {
        self.sum[i] / self.n as f64
    }

    /// Standard error of the mean of statistic `i`.
    pub fn std_error(&self, i: usize) -> f64 {
        let n = self.n as f64;
        let mean = self.mean(i);
        let var = (self.sum_sq[i] / n - mean * mean).max(0.0);
        (var / n).sqrt()
    }

    /// Normal-approximation 99% half-width.
    pub fn half_width(&self, i: usize) -> f64 {
        Z99 * self.std_error(i)
    }
}

/// Runs `samples` draws of `k` statistics on `workers` threads.
///
/// `draw` fills its output slice with the statistics of one sample.
pub fn run<F>(samples: u64, seed: u64, workers: usize, k: usize, draw: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng, &mut [f64]) -> Result<()> + Sync,
{
    if samples == 0 {
        return param("sample count must be positive");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Io(e.to_string()))?;
    let blocks = samples.div_ceil(BLOCK);
    let parts: Vec<Result<Moments>> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| {
                let mut rng = block_rng(seed, b);
                let count = BLOCK.min(samples - b * BLOCK);
                let mut acc = Moments::new(k);
                let mut buf = vec![0.0; k];
                for _ in 0..count {
                    draw(&mut rng, &mut buf)?;
                    acc.push(&buf);
                }
                Ok(acc)
            })
            .collect()
    });
    let mut total = Moments::new(k);
    for part in parts {
        total.merge(&part?);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn coin(samples: u64, workers: usize) -> Moments {
        run(samples, 99, workers, 1, |rng, out| {
            out[0] = (rng.gen::<f64>() < 0.25) as u8 as f64;
            Ok(())
        })
        .unwrap()
    }

    #[test]
    fn independent_of_worker_count() {
        let a = coin(50_000, 1);
        let b = coin(50_000, 3);
        let c = coin(50_000, 8);
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!((a.mean(0) - 0.25).abs() < 3.0 * a.std_error(0) + 1e-3);
    }

    #[test]
    fn partial_last_block() {
        let m = coin(BLOCK + 5, 2);
        assert_eq!(m.n, BLOCK + 5);
    }

    #[test]
    fn zero_samples_rejected() {
        assert!(run(0, 1, 1, 1, |_, _| Ok(())).is_err());
    }
}
