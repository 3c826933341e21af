//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature (default) `Parallelism::Parallel` fans work out over
//! the rayon pool; without it every call runs sequentially. Results are always
//! returned in index order and each item is computed independently, so output is
//! identical in both modes.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    Sequential,
    #[default]
    Parallel,
}

impl Parallelism {
    /// `true` only when parallel execution was requested and compiled in.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Parallelism::Parallel
    }
}

/// `(0..n).map(f).collect()`, possibly in parallel. `min_len` bounds the smallest
/// unit of work handed to a worker.
pub fn map_indexed<T, F>(parallelism: Parallelism, n: usize, min_len: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallelism.is_parallel() {
        return (0..n)
            .into_par_iter()
            .with_min_len(min_len.max(1))
            .map(f)
            .collect();
    }
    let _ = (parallelism, min_len);
    (0..n).map(f).collect()
}

/// Maps over a slice, possibly in parallel, preserving order.
pub fn map_slice<S, T, F>(parallelism: Parallelism, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if parallelism.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = parallelism;
    items.iter().map(f).collect()
}

/// Runs `f` inside a dedicated pool of `workers` threads when parallelism is enabled.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = workers {
        if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build() {
            return pool.install(f);
        }
    }
    let _ = workers;
    f()
}
