//! Chunked execution with a fixed reduction order.

use alloc::vec::Vec;

/// Trajectories per chunk. Fixed so partial sums do not depend on worker count.
pub const CHUNK: usize = 512;

/// Evaluates `f(0), …, f(n−1)` and returns the results in index order.
pub trait Runner: Sync {
    fn map_chunks<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send;
}

/// Single-threaded runner.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Runner for Serial {
    fn map_chunks<R, F>(&self, n: usize, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(usize) -> R + Sync + Send,
    {
        (0..n).map(f).collect()
    }
}

/// Half-open index ranges of at most [`CHUNK`] covering `0..total`.
pub fn chunk_ranges(total: u64) -> Vec<(u64, u64)> {
    let step = CHUNK as u64;
    let mut out = Vec::with_capacity(total.div_ceil(step) as usize);
    let mut start = 0;
    while start < total {
        let end = (start + step).min(total);
        out.push((start, end));
        start = end;
    }
    out
}
