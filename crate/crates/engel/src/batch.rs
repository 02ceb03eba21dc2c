//! Data-parallel mapping with a sequential fallback.
//!
//! With the `parallel` feature (on by default) [`map`] runs on the rayon
//! pool; without it, or through [`map_seq`], items are processed in order
//! on the calling thread. Output order always matches input order.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, in parallel when the feature is enabled.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        map_seq(items, f)
    }
}

/// Sequential map, available in every build.
pub fn map_seq<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}

/// Whether [`map`] dispatches to the thread pool in this build.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Evenly spaced interior points `a + (b−a)·i/(n+1)`, `i = 1..=n`.
pub fn interior_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|i| a + (b - a) * i as f64 / (n + 1) as f64)
        .collect()
}
