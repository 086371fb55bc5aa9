//! Execution backend for the per-point loops.
//!
//! With the `parallel` feature (on by default) loops fan out over the rayon
//! pool; without it the same closures run sequentially. Reductions are always
//! split into fixed-size chunks whose partial sums are combined in index order,
//! so results are bit-identical across thread counts and across backends.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Name of the backend compiled in, used to label benchmarks and reports.
pub const BACKEND: &str = if cfg!(feature = "parallel") {
    "rayon"
} else {
    "sequential"
};

/// Chunk length of deterministic reductions.
pub const REDUCE_CHUNK: usize = 4096;

/// Evaluates `f` at `0..n` and collects the results in index order.
pub fn map_collect<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Runs `f(chunk_index, chunk)` over consecutive chunks of `data`.
pub fn for_each_chunk_mut<T, F>(data: &mut [T], chunk: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        data.par_chunks_mut(chunk)
            .enumerate()
            .for_each(|(i, c)| f(i, c));
    }
    #[cfg(not(feature = "parallel"))]
    {
        data.chunks_mut(chunk).enumerate().for_each(|(i, c)| f(i, c));
    }
}

/// Deterministic sum of `f(0) + ... + f(n-1)`.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(REDUCE_CHUNK);
    let partial = map_collect(chunks, |c| {
        let lo = c * REDUCE_CHUNK;
        let hi = (lo + REDUCE_CHUNK).min(n);
        let mut acc = 0.0;
        for i in lo..hi {
            acc += f(i);
        }
        acc
    });
    partial.into_iter().sum()
}

/// Deterministic dot product.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    sum(a.len(), |i| a[i] * b[i])
}

/// `y += alpha * x`.
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for_each_chunk_mut(y, REDUCE_CHUNK, |c, ys| {
        let off = c * REDUCE_CHUNK;
        for (k, yk) in ys.iter_mut().enumerate() {
            *yk += alpha * x[off + k];
        }
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sum_matches_sequential_chunking() {
        let n = 3 * REDUCE_CHUNK + 17;
        let f = |i: usize| ((i as f64) * 0.37).sin();
        let mut expected = 0.0;
        for c in 0..n.div_ceil(REDUCE_CHUNK) {
            let mut acc = 0.0;
            for i in c * REDUCE_CHUNK..((c + 1) * REDUCE_CHUNK).min(n) {
                acc += f(i);
            }
            expected += acc;
        }
        assert_eq!(sum(n, f).to_bits(), expected.to_bits());
    }

    #[test]
    fn map_collect_keeps_order() {
        let v = map_collect(1000, |i| i * 2);
        assert!(v.iter().enumerate().all(|(i, &x)| x == 2 * i));
    }
}
