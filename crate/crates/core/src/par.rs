//! Index-ordered map over `0..n`, parallel under the `parallel` feature.
//!
//! Output order is the index order whatever the thread count, so as long as
//! the closure derives its randomness from the index the result is identical
//! for serial and parallel builds.

use alloc::vec::Vec;

#[cfg(feature = "parallel")]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    use rayon::prelude::*;
    (0..n).into_par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

/// Fallible variant; the first error in index order is returned.
#[cfg(feature = "parallel")]
pub fn try_map_indices<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indices(n, f).into_iter().collect()
}

#[cfg(not(feature = "parallel"))]
pub fn try_map_indices<T, E, F>(n: usize, f: F) -> Result<Vec<T>, E>
where
    F: Fn(usize) -> Result<T, E>,
{
    (0..n).map(f).collect()
}

/// Splits `total` items into consecutive blocks of at most `block` items,
/// returning `(start, len)` pairs.
pub fn blocks(total: usize, block: usize) -> Vec<(usize, usize)> {
    let block = block.max(1);
    let mut out = Vec::with_capacity(total.div_ceil(block));
    let mut start = 0;
    while start < total {
        let len = block.min(total - start);
        out.push((start, len));
        start += len;
    }
    out
}
