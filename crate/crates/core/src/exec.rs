//! Batch fan-out for the Monte Carlo kernels.
//!
//! With the `parallel` feature, batches are spread over the rayon pool;
//! without it every strategy runs on the calling thread. Results always come
//! back in batch order, so reductions done by the caller are reproducible
//! regardless of the strategy.

/// Execution strategy for independent batches.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    /// Parallel when the `parallel` feature is enabled, otherwise sequential.
    #[default]
    Auto,
    Sequential,
    Parallel,
}

impl Exec {
    /// Whether this strategy actually runs on the thread pool in this build.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && !matches!(self, Exec::Sequential)
    }
}

/// Evaluates `f(0..n)` and returns the results in index order.
pub fn map_indexed<T, F>(exec: Exec, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec.is_parallel() {
            use rayon::prelude::*;
            return (0..n).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..n).map(f).collect()
}

/// Splits `total` items into batches of at most `batch` items.
pub(crate) fn batch_sizes(total: usize, batch: usize) -> Vec<usize> {
    let batch = batch.max(1);
    let full = total / batch;
    let mut sizes = vec![batch; full];
    if total % batch != 0 {
        sizes.push(total % batch);
    }
    sizes
}
