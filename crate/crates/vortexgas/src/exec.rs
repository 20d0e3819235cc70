//! Data-parallel helpers with a sequential fallback.
//!
//! With the default `parallel` feature the maps below fan out over rayon;
//! without it they run sequentially. Every result is written into a slot
//! indexed by its input, and each slot is produced by a sequential,
//! fixed-order computation, so outputs are bit-identical for any thread
//! count, including one.

/// Map `f` over `0..n`, collecting results in index order.
pub fn indexed_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential variant of [`indexed_map`], kept available in parallel builds
/// for oracle comparisons and benchmarks.
pub fn indexed_map_serial<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Map `f` over the items of a slice, collecting results in item order.
pub fn slice_map<'a, I, T, F>(items: &'a [I], f: F) -> Vec<T>
where
    I: Sync,
    T: Send,
    F: Fn(&'a I) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
