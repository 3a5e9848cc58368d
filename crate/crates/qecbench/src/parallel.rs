//! Shot-parallel sampling.

use qecbench_core::{Experiment, FailureHistogram, Result};
use rayon::prelude::*;

pub const THREADS_ENV: &str = "QECBENCH_THREADS";

/// Worker count from `QECBENCH_THREADS`, else the hardware parallelism.
pub fn thread_count() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Shots per task; small enough to balance, large enough to amortize.
const CHUNK: u64 = 8;

/// Same histogram as [`Experiment::sample_failure_distribution`] for any
/// `threads`: every shot has its own stream and merging is commutative.
pub fn sample(experiment: &Experiment, threads: usize) -> Result<FailureHistogram> {
    let n = experiment.config().n_samples;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool starts");
    let chunks: Vec<u64> = (0..n.div_ceil(CHUNK)).collect();
    pool.install(|| {
        chunks
            .par_iter()
            .map(|&c| experiment.sample_range(c * CHUNK..((c + 1) * CHUNK).min(n)))
            .try_reduce(
                || FailureHistogram::new(experiment.config().max_iterations),
                |mut a, b| {
                    a.merge(&b);
                    Ok(a)
                },
            )
    })
}
