//! Data-parallel helpers. With the `parallel` feature the closures run on the
//! rayon pool, otherwise sequentially. Every helper is a pure map over
//! disjoint chunks, so results do not depend on the schedule.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Calls `f(index, chunk)` for every `chunk_len`-sized chunk of `data`.
pub fn for_each_chunk<T, F>(data: &mut [T], chunk_len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(chunk_len)
        .enumerate()
        .for_each(|(i, c)| f(i, c));
}

/// Like [`for_each_chunk`] but walks two buffers in lockstep with
/// independent chunk lengths.
pub fn for_each_chunk_pair<A, B, F>(src: &[A], src_len: usize, dst: &mut [B], dst_len: usize, f: F)
where
    A: Sync,
    B: Send,
    F: Fn(usize, &[A], &mut [B]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    dst.par_chunks_mut(dst_len)
        .zip(src.par_chunks(src_len))
        .enumerate()
        .for_each(|(i, (d, s))| f(i, s, d));
    #[cfg(not(feature = "parallel"))]
    dst.chunks_mut(dst_len)
        .zip(src.chunks(src_len))
        .enumerate()
        .for_each(|(i, (d, s))| f(i, s, d));
}

/// Ordered parallel map over `0..n`.
pub fn map_indices<R, F>(n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return (0..n).into_par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return (0..n).map(f).collect();
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}
