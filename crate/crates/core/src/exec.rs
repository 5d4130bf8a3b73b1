//! Order-preserving sweep execution, parallel when the `parallel` feature is
//! enabled and sequential otherwise.
//!
//! Every sweep in this crate is embarrassingly parallel: the work items are
//! independent simulations that differ only in their step size. The helpers
//! here hide the rayon/serial distinction behind one function so callers are
//! oblivious to the build configuration, and — crucially — the output order
//! is the input order in both builds, so artifacts are byte-identical no
//! matter how the work was scheduled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `items`, returning results in input order.
///
/// Runs on the rayon thread pool when the `parallel` feature is enabled;
/// otherwise equivalent to `ordered_map_seq`.
pub fn ordered_map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}

/// Sequential reference implementation of [`ordered_map`], available in all
/// builds (used by benchmarks to measure the parallel speedup).
pub fn ordered_map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

/// Fallible variant of [`ordered_map`]: returns the first error encountered
/// (in input order for the sequential build; rayon picks an arbitrary failing
/// item, which is fine because callers only propagate, never compare, errors).
pub fn try_ordered_map<T, U, E, F>(items: Vec<T>, f: F) -> Result<Vec<U>, E>
where
    T: Send,
    U: Send,
    E: Send,
    F: Fn(T) -> Result<U, E> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.into_iter().map(f).collect()
    }
}
