//! Deterministic, parallel execution of bootstrap and Monte Carlo replicates.
//!
//! Replicate `r` always draws from its own ChaCha stream keyed by the master
//! seed and `r`, so results depend only on (seed, R, closures) and never on
//! the number of workers or on scheduling.

use std::num::NonZeroUsize;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::Sample;

pub type ReplicateRng = ChaCha8Rng;

/// Worker-count policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Workers {
    /// All available cores except one (at least one).
    #[default]
    AllButOne,
    Count(NonZeroUsize),
}

impl Workers {
    /// Interprets a job count the way the CLI does: −1 means all but one.
    pub fn from_jobs(jobs: i64) -> Result<Self> {
        match jobs {
            -1 => Ok(Workers::AllButOne),
            j if j >= 1 => Ok(Workers::Count(NonZeroUsize::new(j as usize).unwrap())),
            j => Err(Error::usage(format!("jobs must be -1 or a positive count, got {j}"))),
        }
    }

    pub fn single() -> Self {
        Workers::Count(NonZeroUsize::MIN)
    }

    pub fn resolve(&self) -> usize {
        match self {
            Workers::AllButOne => {
                let available = std::thread::available_parallelism().map_or(1, NonZeroUsize::get);
                available.saturating_sub(1).max(1)
            }
            Workers::Count(n) => n.get(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapPlan {
    pub replicates: usize,
    pub seed: u64,
    pub workers: Workers,
}

impl BootstrapPlan {
    pub fn new(replicates: usize, seed: u64, workers: Workers) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::usage("the number of replicates must be at least 1"));
        }
        Ok(BootstrapPlan {
            replicates,
            seed,
            workers,
        })
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for replicate `index` (and retry `attempt`) under `seed`.
pub fn replicate_rng(seed: u64, index: u64, attempt: u64) -> ReplicateRng {
    let key = splitmix64(seed ^ splitmix64(attempt.wrapping_mul(0xA076_1D64_78BD_642F)));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(index);
    rng
}

/// Mixes a label into a seed, for deriving sub-seeds that must not collide
/// with the caller's own replicate streams.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    splitmix64(seed.wrapping_add(splitmix64(label)))
}

#[cfg(feature = "parallel")]
fn map_indices<T, F>(count: usize, workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    if workers <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(|| (0..count).into_par_iter().map(&f).collect()),
        Err(_) => (0..count).map(f).collect(),
    }
}

#[cfg(not(feature = "parallel"))]
fn map_indices<T, F>(count: usize, _workers: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    (0..count).map(f).collect()
}

/// Runs `task` once per replicate index and returns the results in index
/// order. A failing replicate is retried once on a perturbed stream; a
/// second failure aborts with the lowest failing index.
pub fn run_indexed<T, F>(plan: &BootstrapPlan, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut ReplicateRng) -> Result<T> + Sync + Send,
{
    let results = map_indices(plan.replicates, plan.workers.resolve(), |r| {
        let mut rng = replicate_rng(plan.seed, r as u64, 0);
        task(r, &mut rng).or_else(|_| {
            let mut rng = replicate_rng(plan.seed, r as u64, 1);
            task(r, &mut rng).map_err(|e| Error::Replicate {
                index: r,
                source: Box::new(e),
            })
        })
    });
    results.into_iter().collect()
}

/// Evaluates `statistic` on R synthetic samples and returns the values sorted
/// ascending.
pub fn run_replicates<G, S>(plan: &BootstrapPlan, generate: G, statistic: S) -> Result<Vec<f64>>
where
    G: Fn(usize, &mut ReplicateRng) -> Result<Sample> + Sync + Send,
    S: Fn(&Sample) -> Result<f64> + Sync + Send,
{
    let mut values = run_indexed(plan, |r, rng| {
        let sample = generate(r, rng)?;
        let value = statistic(&sample)?;
        if value.is_nan() {
            return Err(Error::numeric("statistic evaluated to NaN"));
        }
        Ok(value)
    })?;
    values.sort_by(f64::total_cmp);
    Ok(values)
}
