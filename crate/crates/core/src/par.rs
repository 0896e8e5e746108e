//! Data-parallel helpers with a sequential fallback.
//!
//! With the `parallel` feature the loops below run on the rayon pool;
//! without it they are plain iterator loops. Every reduction is done over
//! fixed-size chunks and summed in chunk order, so results are bitwise
//! identical between the two builds and across thread counts.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Chunk length used for deterministic reductions.
pub const CHUNK: usize = 4096;

/// `out[i] = f(i)` for every index.
pub fn fill<F>(out: &mut [f64], f: F)
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
    #[cfg(not(feature = "parallel"))]
    out.iter_mut().enumerate().for_each(|(i, o)| *o = f(i));
}

/// Apply `f` to every `len`-sized row of `data`, passing the row index.
pub fn for_each_row<T, F>(data: &mut [T], len: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    data.par_chunks_mut(len).enumerate().for_each(|(i, c)| f(i, c));
    #[cfg(not(feature = "parallel"))]
    data.chunks_mut(len).enumerate().for_each(|(i, c)| f(i, c));
}

/// Deterministic `Σ_i f(i)` over `0..n`.
pub fn sum<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    let chunks = n.div_ceil(CHUNK);
    let partial = |c: usize| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        (lo..hi).map(&f).sum::<f64>()
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<f64> = (0..chunks).into_par_iter().map(partial).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<f64> = (0..chunks).map(partial).collect();
    parts.iter().sum()
}

/// Map independent jobs, preserving input order.
pub fn map<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    #[cfg(feature = "parallel")]
    return items.par_iter().map(f).collect();
    #[cfg(not(feature = "parallel"))]
    return items.iter().map(f).collect();
}

pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chunked_sum_matches_sequential_order() {
        let n = 3 * CHUNK + 17;
        let s = sum(n, |i| 1.0 / (1.0 + i as f64));
        let mut expect = 0.0;
        for c in 0..n.div_ceil(CHUNK) {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            expect += (lo..hi).map(|i| 1.0 / (1.0 + i as f64)).sum::<f64>();
        }
        assert_eq!(s.to_bits(), expect.to_bits());
    }

    #[test]
    fn fill_and_map_preserve_order() {
        let mut v = vec![0.0; 100];
        fill(&mut v, |i| i as f64);
        assert!(v.iter().enumerate().all(|(i, &x)| x == i as f64));
        let m = map(&[1, 2, 3], |x| x * 2);
        assert_eq!(m, vec![2, 4, 6]);
    }
}
