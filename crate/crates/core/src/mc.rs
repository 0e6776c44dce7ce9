//! Seeded, order-independent Monte-Carlo batches.
//!
//! Every batch owns a ChaCha8 stream chosen by `(seed, query, batch)`. Batch
//! results are merged by counting, so totals are bit-identical whatever the
//! number of worker threads, and whether or not the `parallel` feature is on.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub type McRng = ChaCha8Rng;

pub const DEFAULT_BATCH_SIZE: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Execution {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    pub seed: u64,
    pub batch_size: u64,
    pub execution: Execution,
}

impl McConfig {
    pub fn new(seed: u64) -> Self {
        Self { seed, batch_size: DEFAULT_BATCH_SIZE, execution: Execution::default() }
    }

    pub fn sequential(mut self) -> Self {
        self.execution = Execution::Sequential;
        self
    }

    pub fn with_batch_size(mut self, batch_size: u64) -> Self {
        assert!(batch_size > 0);
        self.batch_size = batch_size;
        self
    }

    /// A config whose streams are disjoint from this one's, for a sub-task.
    pub fn derive(&self, salt: u64) -> Self {
        Self { seed: splitmix64(self.seed ^ splitmix64(salt.wrapping_add(0x5EED))), ..*self }
    }

    pub fn batch_rng(&self, query: u64, batch: u64) -> McRng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.seed ^ splitmix64(query)));
        rng.set_stream(batch);
        rng
    }

    /// Runs `f` once per batch index in `batches`, returning results in batch
    /// order.
    pub fn map_batches<T, F>(&self, query: u64, batches: std::ops::Range<u64>, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&mut McRng, u64) -> T + Sync + Send,
    {
        let run = |b: u64| {
            let mut rng = self.batch_rng(query, b);
            f(&mut rng, b)
        };
        match self.execution {
            #[cfg(feature = "parallel")]
            Execution::Parallel => batches.into_par_iter().map(run).collect(),
            _ => batches.map(run).collect(),
        }
    }

    /// Counts how many of the samples in `batches` satisfy `event`.
    pub fn count<F>(&self, query: u64, batches: std::ops::Range<u64>, event: F) -> u64
    where
        F: Fn(&mut McRng) -> bool + Sync + Send,
    {
        let size = self.batch_size;
        self.map_batches(query, batches, |rng, _| (0..size).filter(|_| event(rng)).count() as u64)
            .into_iter()
            .sum()
    }

    /// Sum of `value` over the samples in `batches`, accumulated per batch
    /// and then in batch order.
    pub fn sum<F>(&self, query: u64, batches: std::ops::Range<u64>, value: F) -> f64
    where
        F: Fn(&mut McRng) -> f64 + Sync + Send,
    {
        let size = self.batch_size;
        self.map_batches(query, batches, |rng, _| (0..size).map(|_| value(rng)).sum::<f64>())
            .into_iter()
            .sum()
    }

    /// Number of whole batches needed to reach at least `samples` samples.
    pub fn batches_for(&self, samples: u64) -> u64 {
        samples.div_ceil(self.batch_size).max(1)
    }
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Binomial proportion with a Wilson-score interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Proportion {
    pub successes: u64,
    pub trials: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64, z: f64) -> Self {
        let (ci_low, ci_high) = wilson(successes, trials, z);
        let estimate = if trials == 0 { 0.5 } else { successes as f64 / trials as f64 };
        Self { successes, trials, estimate, ci_low, ci_high }
    }

    /// Binomial standard error of the estimate.
    pub fn sigma(&self) -> f64 {
        if self.trials == 0 {
            return 0.5;
        }
        (self.estimate * (1.0 - self.estimate) / self.trials as f64).sqrt()
    }
}

pub fn wilson(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Two-sided standard-normal quantile `z` with `P(|N| > z) = alpha`.
pub fn z_two_sided(alpha: f64) -> f64 {
    normal_upper_quantile(alpha / 2.0)
}

/// `z` with `P(N > z) = tail`, by bisection on the complementary error
/// function; accurate to ~1e-12 for tails down to 1e-300.
pub fn normal_upper_quantile(tail: f64) -> f64 {
    assert!(tail > 0.0 && tail < 1.0);
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_sf(mid) > tail {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Upper tail of the standard normal.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}
