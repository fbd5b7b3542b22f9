//! Batched, seeded Monte Carlo averaging.
//!
//! Samples are split into fixed-size batches. Batch `b` draws from its own
//! ChaCha stream seeded with `seed::mix(seed, b)`, and batch moments are
//! merged in index order. The result therefore depends only on `(samples,
//! seed)`, never on how batches were scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::seed;

pub const BATCH_SIZE: u64 = 4096;

/// Running mean and sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    /// Chan et al. pairwise merge.
    pub fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * (other.count as f64 / count as f64);
        let m2 = self.m2
            + other.m2
            + delta * delta * (self.count as f64 * other.count as f64 / count as f64);
        Moments { count, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (self.variance() / self.count as f64).sqrt()
    }
}

fn run_batch<F>(samples: u64, seed: u64, batch: u64, f: &F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64,
{
    let start = batch * BATCH_SIZE;
    let n = BATCH_SIZE.min(samples - start);
    let mut rng = ChaCha8Rng::seed_from_u64(seed::mix(seed, batch));
    let mut m = Moments::default();
    for _ in 0..n {
        m.push(f(&mut rng));
    }
    m
}

/// Averages `f` over `samples` draws.
///
/// With the `parallel` feature and `parallel == true`, batches run on the
/// rayon pool; otherwise they run sequentially. Both produce bit-identical
/// moments.
pub fn average<F>(samples: u64, seed: u64, parallel: bool, f: F) -> Moments
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    let batches = samples.div_ceil(BATCH_SIZE);
    let per_batch: Vec<Moments> = if parallel {
        parallel_batches(samples, seed, batches, &f)
    } else {
        (0..batches)
            .map(|b| run_batch(samples, seed, b, &f))
            .collect()
    };
    per_batch
        .into_iter()
        .fold(Moments::default(), Moments::merge)
}

#[cfg(feature = "parallel")]
fn parallel_batches<F>(samples: u64, seed: u64, batches: u64, f: &F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    use rayon::prelude::*;
    (0..batches)
        .into_par_iter()
        .map(|b| run_batch(samples, seed, b, f))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn parallel_batches<F>(samples: u64, seed: u64, batches: u64, f: &F) -> Vec<Moments>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    (0..batches)
        .map(|b| run_batch(samples, seed, b, f))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn merge_matches_sequential_push() {
        let xs: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Moments::default();
        xs.iter().for_each(|&x| all.push(x));
        let mut a = Moments::default();
        let mut b = Moments::default();
        xs[..313].iter().for_each(|&x| a.push(x));
        xs[313..].iter().for_each(|&x| b.push(x));
        let merged = a.merge(b);
        assert_eq!(merged.count, all.count);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-9);
    }

    #[test]
    fn parallel_and_sequential_are_bit_identical() {
        let f = |rng: &mut ChaCha8Rng| rng.random::<f64>();
        let seq = average(50_001, 9, false, f);
        let par = average(50_001, 9, true, f);
        assert_eq!(seq, par);
        assert_eq!(seq.count, 50_001);
    }

    #[test]
    fn uniform_mean_is_half() {
        let m = average(200_000, 1, true, |rng| rng.random::<f64>());
        assert!((m.mean - 0.5).abs() < 4.0 * m.stderr());
    }
}
