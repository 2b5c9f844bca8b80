//! Indexed fan-out over independent work units (trials, replications, cases).
//!
//! Results always come back in index order, so aggregation is identical
//! whether the `parallel` feature is on or off.

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(feature = "parallel")]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

/// Maps `f` over `0..n`, in parallel when the `parallel` feature is enabled.
#[cfg(not(feature = "parallel"))]
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    map_indexed_sequential(n, f)
}

/// Always-sequential variant of [`map_indexed`].
pub fn map_indexed_sequential<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Whether [`map_indexed`] runs on the rayon pool in this build.
pub const fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
