//! Rayon-backed [`Runner`].

use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};
use weakmeas_core::Runner;

/// Fixed-size worker pool. Chunk results come back in index order, so
/// estimates match [`weakmeas_core::Serial`] bit for bit.
pub struct Pool {
    pool: ThreadPool,
}

impl Pool {
    /// `workers = 0` uses every available core.
    pub fn new(workers: usize) -> Self {
        let pool = ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool construction");
        Self { pool }
    }

    pub fn workers(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl Default for Pool {
    fn default() -> Self {
        Self::new(0)
    }
}

impl Runner for Pool {
    fn map_chunks<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}
