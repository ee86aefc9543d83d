//! Parallel Monte Carlo driver.
//!
//! Realizations are spread over a rayon pool, collected back in index order
//! and reduced serially, so the estimate is the same for any thread count.

use nrcsim_core::montecarlo::{McError, McEstimate, McJob};
use rayon::prelude::*;

/// Environment variable consulted when `--threads` is absent or 0.
pub const THREADS_ENV: &str = "NRCSIM_THREADS";

/// Worker count: an explicit positive request wins, then [`THREADS_ENV`];
/// 0 means one worker per core.
pub fn resolve_threads(requested: Option<usize>) -> usize {
    match requested {
        Some(n) if n > 0 => n,
        _ => std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(0),
    }
}

pub struct Driver {
    pool: rayon::ThreadPool,
}

impl Driver {
    pub fn new(threads: usize) -> Result<Self, rayon::ThreadPoolBuildError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()?;
        Ok(Driver { pool })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }

    pub fn estimate(&self, job: &McJob, n_realizations: usize) -> Result<McEstimate, McError> {
        if n_realizations < 2 {
            return Err(McError::InsufficientRealizations {
                requested: n_realizations,
            });
        }
        let records = self.pool.install(|| {
            (0..n_realizations as u64)
                .into_par_iter()
                .map(|i| job.realization(i))
                .collect::<Result<Vec<_>, _>>()
        })?;
        job.reduce(&records)
    }
}
