//! Bounded worker pool with order-preserving merge.
//!
//! Results come back in input order whatever the worker count, so callers that
//! sort their work items canonically get identical output for any `jobs`.

use rayon::prelude::*;

/// Maps `f` over `items` on `jobs` workers; the output order matches `items`.
pub fn ordered_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(jobs).build() {
        Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
        Err(_) => items.iter().map(f).collect(),
    }
}
