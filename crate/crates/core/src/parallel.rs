//! Thread-count control. Results never depend on the count: work is split
//! into fixed pieces whose partial sums are combined in a fixed order.

use rayon::prelude::*;

use crate::numeric::KahanSum;

/// Environment variable read by the CLI for the default worker count.
pub const THREADS_ENV: &str = "RESLAB_THREADS";

/// Runs `f` on a pool of `threads` workers (`0` = rayon default).
pub fn with_threads<R: Send, F: FnOnce() -> R + Send>(threads: usize, f: F) -> R {
    if threads == 0 {
        return f();
    }
    match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Maps `f` over `items` in parallel and returns results in input order.
pub fn ordered_map<T: Sync, R: Send, F: Fn(&T) -> R + Sync + Send>(items: &[T], f: F) -> Vec<R> {
    items.par_iter().map(f).collect()
}

/// Compensated sum of per-chunk partial sums, combined left to right.
pub fn combine(partials: &[f64]) -> f64 {
    partials.iter().copied().collect::<KahanSum>().value()
}
