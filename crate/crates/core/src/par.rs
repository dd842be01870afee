//! Ordered data-parallel map with a sequential fallback.
//!
//! With the `parallel` feature the work fans out over rayon; without it
//! the same call runs sequentially. Both paths yield results in input
//! order, so callers see identical output either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Sequential map, always. Kept public so benchmarks and determinism
/// tests can compare against the parallel path.
pub fn map_ordered_seq<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}
