//! Thin dispatch between the rayon-backed and the sequential execution
//! paths. The `parallel` feature (on by default) routes the generic
//! entry points through rayon; without it everything runs sequentially.
//! The `_seq`/`_par` variants are fixed, for side-by-side measurement.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub fn map_seq<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    items.into_iter().map(f).collect()
}

#[cfg(feature = "parallel")]
pub fn map_par<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    items.into_par_iter().map(f).collect()
}

/// Order-preserving map over independent work items.
#[cfg(feature = "parallel")]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    T: Send,
    U: Send,
    F: Fn(T) -> U + Sync + Send,
{
    map_par(items, f)
}

#[cfg(not(feature = "parallel"))]
pub fn map<T, U, F>(items: Vec<T>, f: F) -> Vec<U>
where
    F: Fn(T) -> U,
{
    map_seq(items, f)
}

pub fn range_all_seq<F>(n: u32, f: F) -> bool
where
    F: Fn(u32) -> bool,
{
    (0..n).all(f)
}

#[cfg(feature = "parallel")]
pub fn range_all_par<F>(n: u32, f: F) -> bool
where
    F: Fn(u32) -> bool + Sync + Send,
{
    (0..n).into_par_iter().all(f)
}

/// True when `f` holds on every value in `0..n`.
#[cfg(feature = "parallel")]
pub fn range_all<F>(n: u32, f: F) -> bool
where
    F: Fn(u32) -> bool + Sync + Send,
{
    // Tiny ranges are not worth the fork/join overhead.
    if n < 1 << 10 {
        range_all_seq(n, f)
    } else {
        range_all_par(n, f)
    }
}

#[cfg(not(feature = "parallel"))]
pub fn range_all<F>(n: u32, f: F) -> bool
where
    F: Fn(u32) -> bool,
{
    range_all_seq(n, f)
}
