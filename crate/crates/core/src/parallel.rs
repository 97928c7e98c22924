//! Order-preserving parallel map on a dedicated thread pool.

use rayon::prelude::*;

/// Applies `f` to every item using `jobs` worker threads (1 = sequential).
/// Results come back in input order regardless of `jobs`.
pub fn run_ordered<T, R, F>(jobs: usize, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 || items.len() < 2 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}
