//! Replication scheduling, compensated sums and interval arithmetic shared by
//! all Monte-Carlo estimators.
//!
//! Replications are grouped into fixed-size chunks. Each chunk folds its
//! replications in index order into a fresh accumulator, and chunk results
//! are merged in chunk order on the calling thread. Together with per-replication
//! RNG streams this makes every estimate independent of the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Replications per scheduling chunk.
pub const CHUNK: u64 = 4096;

/// Environment variable consulted when no worker count is given.
pub const WORKERS_ENV: &str = "HEAVYTAIL_WORKERS";

/// Default step cap per replication.
pub const DEFAULT_CAP: u64 = 10_000_000;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Sample size, seed, parallelism and step cap for one estimator call.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McOptions {
    pub n: u64,
    pub seed: u64,
    /// Worker threads; falls back to `HEAVYTAIL_WORKERS`, then to the CPU count.
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default = "default_cap")]
    pub cap: u64,
}

fn default_cap() -> u64 {
    DEFAULT_CAP
}

impl McOptions {
    pub fn new(n: u64, seed: u64) -> Self {
        Self { n, seed, workers: None, cap: DEFAULT_CAP }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    pub fn with_cap(mut self, cap: u64) -> Self {
        self.cap = cap;
        self
    }

    pub(crate) fn check(&self, min_n: u64) -> Result<()> {
        if self.n < min_n {
            return Err(Error::InvalidParameter(format!("n must be at least {min_n}, got {}", self.n)));
        }
        if self.cap == 0 {
            return Err(Error::InvalidParameter("cap must be at least 1".into()));
        }
        Ok(())
    }
}

pub fn resolve_workers(requested: Option<usize>) -> usize {
    requested
        .or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()))
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

/// Accumulators that can absorb another accumulator of the same shape.
pub trait Merge {
    fn merge(&mut self, other: Self);
}

/// Runs replications `0..n`, calling `body(acc, rng)` with a fresh RNG
/// derived from `(seed, stream, index)` for each.
pub fn run_replications<A, I, F>(n: u64, seed: u64, stream: u64, workers: Option<usize>, init: I, body: F) -> A
where
    A: Merge + Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, &mut RngState) + Sync,
{
    let chunks = n.div_ceil(CHUNK);
    let work = |c: u64| {
        let mut acc = init();
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let mut rng = RngState::for_replication(seed, stream, i);
            body(&mut acc, &mut rng);
        }
        acc
    };
    let workers = resolve_workers(workers);
    let parts: Vec<A> = if workers <= 1 {
        (0..chunks).map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool");
        pool.install(|| (0..chunks).into_par_iter().map(work).collect())
    };
    let mut total = init();
    for part in parts {
        total.merge(part);
    }
    total
}

pub const Z95: f64 = 1.959_963_984_540_054;

/// Hit counts below this use the Wilson interval.
pub const WILSON_BELOW: u64 = 30;

/// 95% half-width of a binomial proportion `hits / n`.
///
/// Normal approximation, or the larger side of the Wilson score interval
/// when `hits < 30`.
pub fn proportion_half_width(hits: u64, n: u64) -> f64 {
    if n == 0 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let p = hits as f64 / nf;
    if hits >= WILSON_BELOW {
        return Z95 * (p * (1.0 - p) / nf).sqrt();
    }
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / denom;
    let spread = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    (centre + spread - p).max(p - (centre - spread))
}

/// 95% half-width of a sample mean from its first two raw moments.
pub fn mean_half_width(sum: f64, sum_sq: f64, n: u64) -> f64 {
    if n < 2 {
        return f64::INFINITY;
    }
    let nf = n as f64;
    let mean = sum / nf;
    let var = ((sum_sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Z95 * (var / nf).sqrt()
}
