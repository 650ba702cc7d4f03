//! Execution strategy for the data-parallel loops.
//!
//! Every batch operation takes an [`Execution`]. With the `parallel` feature
//! disabled, [`Execution::Parallel`] silently runs sequentially, so results
//! never depend on the build configuration.

use std::ops::Range;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Execution {
    Sequential,
    #[default]
    Parallel,
}

impl Execution {
    /// True when work will actually fan out across threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Execution::Parallel
    }
}

/// Sizes the global worker pool. Must run before any parallel work; a no-op
/// without the `parallel` feature.
pub fn set_threads(threads: usize) -> crate::Result<()> {
    if threads == 0 {
        return Err(crate::Error::OutOfRange("thread count must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| crate::Error::Internal(e.to_string()))?;
    Ok(())
}

/// Maps `f` over `range`, preserving order.
pub(crate) fn map_range<T, F>(exec: Execution, range: Range<usize>, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return range.into_par_iter().map(f).collect();
    }
    let _ = exec;
    range.map(f).collect()
}

/// Maps `f` over a slice, preserving order.
pub(crate) fn map_slice<S, T, F>(exec: Execution, items: &[S], f: F) -> Vec<T>
where
    S: Sync,
    T: Send,
    F: Fn(&S) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Splits `0..len` into contiguous chunks, folds each chunk with `fold`, and
/// combines the partial results with the associative `merge`.
pub(crate) fn fold_chunks<A, F, M>(
    exec: Execution,
    len: usize,
    chunk: usize,
    identity: impl Fn() -> A + Sync + Send,
    fold: F,
    merge: M,
) -> A
where
    A: Send,
    F: Fn(A, Range<usize>) -> A + Sync + Send,
    M: Fn(A, A) -> A + Sync + Send,
{
    let chunk = chunk.max(1);
    let chunks = len.div_ceil(chunk);
    let bounds = |i: usize| i * chunk..((i + 1) * chunk).min(len);
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        return (0..chunks).into_par_iter().map(|i| fold(identity(), bounds(i))).reduce(&identity, &merge);
    }
    let _ = exec;
    (0..chunks).fold(identity(), |acc, i| merge(acc, fold(identity(), bounds(i))))
}

/// Sorts floats in place (total order; NaN is rejected upstream).
pub(crate) fn sort_floats(exec: Execution, values: &mut [f64]) {
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        use rayon::prelude::*;
        values.par_sort_unstable_by(f64::total_cmp);
        return;
    }
    let _ = exec;
    values.sort_unstable_by(f64::total_cmp);
}
