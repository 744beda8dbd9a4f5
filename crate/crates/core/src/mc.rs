//! Batched Monte Carlo estimation with deterministic seeding.
//!
//! Work is split into `batches` independent ChaCha8 streams (stream id = batch
//! index, key = seed). Batches may run concurrently; their accumulators are
//! merged in batch order, so an estimate depends only on
//! `(seed, samples, batches)` and never on the thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Random number generator handed to samplers.
pub type McRng = ChaCha8Rng;

/// Sample budget and seeding for one estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub samples: u64,
    pub seed: u64,
    pub batches: u64,
    /// Relative standard error above which results are flagged (not failed).
    #[serde(default)]
    pub target_rel_error: Option<f64>,
    /// Worker threads; `None` uses the global rayon pool.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self {
            samples,
            seed,
            batches: 64.min(samples.max(1)),
            target_rel_error: None,
            threads: None,
        }
    }

    pub fn with_batches(mut self, batches: u64) -> Self {
        self.batches = batches.max(1);
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, samples: u64) -> Self {
        self.samples = samples;
        self
    }

    /// Generator for batch `b`.
    pub fn stream(&self, batch: u64) -> McRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(batch);
        rng
    }

    fn batch_len(&self, b: u64) -> u64 {
        let batches = self.batches.max(1);
        self.samples / batches + u64::from(b < self.samples % batches)
    }
}

/// Mean and standard error of a Monte Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Sample standard deviation divided by `sqrt(n)`.
    pub std_error: f64,
    pub n: u64,
    pub seed: u64,
}

impl McEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            mean: value,
            std_error: 0.0,
            n: 0,
            seed: 0,
        }
    }

    /// `|mean − target| / std_error` (0 when both agree exactly).
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if diff == 0.0 {
            0.0
        } else if self.std_error == 0.0 {
            f64::INFINITY
        } else {
            diff / self.std_error
        }
    }

    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        (self.mean - target).abs() <= k * self.std_error
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            mean: self.mean * s,
            std_error: self.std_error * s.abs(),
            ..*self
        }
    }

    /// Relative standard error, infinite for a zero mean with nonzero error.
    pub fn rel_error(&self) -> f64 {
        if self.std_error == 0.0 {
            0.0
        } else {
            self.std_error / self.mean.abs()
        }
    }
}

/// Combined standard error of the difference of two independent estimates.
pub fn combined_sigma(a: &McEstimate, b: &McEstimate) -> f64 {
    a.std_error.hypot(b.std_error)
}

#[derive(Clone, Debug)]
struct Accumulator {
    n: u64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Accumulator {
    fn new(m: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; m],
            m2: vec![0.0; m],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.n += 1;
        let n = self.n as f64;
        for ((mean, m2), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let delta = v - *mean;
            *mean += delta / n;
            *m2 += delta * (v - *mean);
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let na = self.n as f64;
        let nb = other.n as f64;
        let n = na + nb;
        for i in 0..self.mean.len() {
            let delta = other.mean[i] - self.mean[i];
            self.mean[i] += delta * nb / n;
            self.m2[i] += other.m2[i] + delta * delta * na * nb / n;
        }
        self.n += other.n;
    }
}

/// Estimates `E[value · weight]` for a sampler returning `(value, weight)`.
pub fn mc_integrate<F>(config: &McConfig, sampler: F) -> Result<McEstimate>
where
    F: Fn(&mut McRng) -> (f64, f64) + Sync,
{
    let mut out = mc_integrate_multi(config, 1, |rng, slot| {
        let (value, weight) = sampler(rng);
        slot[0] = value * weight;
        Ok(())
    })?;
    Ok(out.remove(0))
}

/// Estimates the means of `outputs` jointly sampled quantities.
///
/// The sampler writes one realization into the slice it is handed. Sharing a
/// draw between outputs gives common random numbers across them.
pub fn mc_integrate_multi<F>(config: &McConfig, outputs: usize, sampler: F) -> Result<Vec<McEstimate>>
where
    F: Fn(&mut McRng, &mut [f64]) -> Result<()> + Sync,
{
    if config.samples == 0 {
        return Err(Error::Precondition("sample count must be positive".into()));
    }
    let run_batch = |b: u64| -> Result<Accumulator> {
        let mut rng = config.stream(b);
        let mut acc = Accumulator::new(outputs);
        let mut slot = vec![0.0; outputs];
        for index in 0..config.batch_len(b) {
            slot.iter_mut().for_each(|s| *s = 0.0);
            sampler(&mut rng, &mut slot)?;
            if slot.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteSample { batch: b, index });
            }
            acc.push(&slot);
        }
        Ok(acc)
    };
    let batches: Vec<u64> = (0..config.batches.max(1)).collect();
    let partials: Vec<Result<Accumulator>> = match config.threads {
        Some(1) => batches.iter().map(|&b| run_batch(b)).collect(),
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Error::Precondition(format!("thread pool: {e}")))?;
            pool.install(|| batches.par_iter().map(|&b| run_batch(b)).collect())
        }
        None => batches.par_iter().map(|&b| run_batch(b)).collect(),
    };
    let mut total = Accumulator::new(outputs);
    for p in partials {
        total.merge(&p?);
    }
    let n = total.n;
    Ok((0..outputs)
        .map(|i| {
            let var = if n > 1 {
                total.m2[i] / (n - 1) as f64
            } else {
                0.0
            };
            McEstimate {
                mean: total.mean[i],
                std_error: (var.max(0.0) / n as f64).sqrt(),
                n,
                seed: config.seed,
            }
        })
        .collect())
}
