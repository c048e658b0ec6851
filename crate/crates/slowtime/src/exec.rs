//! Execution-mode plumbing: rayon data parallelism with a sequential
//! fallback.
//!
//! Every parallel kernel in this crate follows the same discipline: the index
//! range is split into fixed-size chunks, each chunk produces an independent
//! partial result, and the partials are folded in chunk order. The chunk
//! boundaries depend only on the problem size, never on the worker count, so
//! outputs are bit-identical across thread counts and identical between
//! [`ExecMode::Sequential`] and [`ExecMode::Parallel`].
//!
//! Public entry points that carry a `_with_mode` suffix exist so the bench
//! suite can time both paths from a single binary; the plain entry points use
//! [`ExecMode::default`], which is parallel whenever the `parallel` feature
//! is enabled.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fixed chunk length for partial reductions. Chosen so a chunk is enough
/// work to amortize scheduling but small enough to load-balance the grid
/// sizes this crate sees in practice.
const CHUNK: usize = 32;

/// How a kernel should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExecMode {
    /// Single-threaded. Always available.
    Sequential,
    /// Rayon thread pool. Available with the `parallel` feature.
    #[cfg(feature = "parallel")]
    Parallel,
}

impl Default for ExecMode {
    #[cfg(feature = "parallel")]
    fn default() -> Self {
        ExecMode::Parallel
    }
    #[cfg(not(feature = "parallel"))]
    fn default() -> Self {
        ExecMode::Sequential
    }
}

/// Map `f` over `0..n`, preserving index order in the output.
pub fn map_indexed<T, F>(mode: ExecMode, n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    match mode {
        ExecMode::Sequential => (0..n).map(f).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n).into_par_iter().map(f).collect(),
    }
}

/// Chunked map-reduce over `0..n`.
///
/// Each chunk folds its indices in order onto `init()` via `fold`; chunk
/// results are then combined in chunk order via `combine`. Both modes use
/// the same chunking, so the floating-point reduction order is fixed.
pub fn fold_chunked<T, FI, FF, FC>(mode: ExecMode, n: usize, init: FI, fold: FF, combine: FC) -> T
where
    T: Send,
    FI: Fn() -> T + Sync,
    FF: Fn(T, usize) -> T + Sync,
    FC: Fn(T, T) -> T,
{
    let n_chunks = n.div_ceil(CHUNK);
    let chunk_result = |c: usize| {
        let lo = c * CHUNK;
        let hi = ((c + 1) * CHUNK).min(n);
        (lo..hi).fold(init(), &fold)
    };
    let partials: Vec<T> = match mode {
        ExecMode::Sequential => (0..n_chunks).map(chunk_result).collect(),
        #[cfg(feature = "parallel")]
        ExecMode::Parallel => (0..n_chunks).into_par_iter().map(chunk_result).collect(),
    };
    let mut it = partials.into_iter();
    match it.next() {
        None => init(),
        Some(first) => it.fold(first, combine),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_chunked_sums_all_indices() {
        let total = fold_chunked(
            ExecMode::Sequential,
            1000,
            || 0usize,
            |acc, i| acc + i,
            |a, b| a + b,
        );
        assert_eq!(total, 999 * 1000 / 2);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn modes_agree_bitwise_on_float_sums() {
        // The fold order is fixed by the chunking, so even a rounding-
        // sensitive sum must agree exactly between modes.
        let f = |i: usize| ((i as f64) * 0.1).sin() / ((i + 1) as f64);
        let seq = fold_chunked(
            ExecMode::Sequential,
            4097,
            || 0.0f64,
            |acc, i| acc + f(i),
            |a, b| a + b,
        );
        let par = fold_chunked(
            ExecMode::Parallel,
            4097,
            || 0.0f64,
            |acc, i| acc + f(i),
            |a, b| a + b,
        );
        assert_eq!(seq.to_bits(), par.to_bits());
    }

    #[test]
    fn map_indexed_preserves_order() {
        let v = map_indexed(ExecMode::default(), 100, |i| i * 2);
        assert_eq!(v[0], 0);
        assert_eq!(v[99], 198);
    }

    #[test]
    fn fold_chunked_empty_range() {
        let total = fold_chunked(ExecMode::Sequential, 0, || 7i64, |a, _| a + 1, |a, b| a + b);
        assert_eq!(total, 7);
    }
}
