//! Thin data-parallel shim: rayon under the `parallel` feature, plain
//! iterators otherwise. Every helper preserves input order so results do not
//! depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Applies `f(chunk_index, chunk)` to consecutive `chunk`-sized pieces.
pub(crate) fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
}

pub(crate) fn map_indexed<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

/// Maps every index and folds the results with `reduce`. `reduce` must be
/// associative and commutative for the result to be scheduling-independent.
pub(crate) fn map_reduce<R, M, Re>(n: usize, map: M, reduce: Re) -> Option<R>
where
    R: Send,
    M: Fn(usize) -> R + Sync + Send,
    Re: Fn(R, R) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(map).reduce_with(reduce);
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(map).reduce(reduce);
}
