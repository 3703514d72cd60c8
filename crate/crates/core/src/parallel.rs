//! Order-preserving map over independent jobs (ε-sweeps, parameter scans).
//!
//! With the `parallel` feature the map runs on a rayon pool whose size is
//! capped by `FASTSLOW_THREADS`; without it the map is a plain loop. Results
//! are always returned in input order, so outputs are identical either way.

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "FASTSLOW_THREADS";

/// Thread cap from `FASTSLOW_THREADS`, or `None` when unset or unparsable.
pub fn thread_cap() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            log::warn!("ignoring {THREADS_ENV}={raw:?}: expected a positive integer");
            None
        }
    }
}

/// Whether this build runs jobs concurrently.
pub fn is_parallel() -> bool {
    cfg!(feature = "parallel")
}

/// Apply `f` to every item, returning results in input order.
#[cfg(feature = "parallel")]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    use rayon::prelude::*;
    match thread_cap() {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| items.par_iter().map(&f).collect()),
            Err(e) => {
                log::warn!("could not build a {n}-thread pool ({e}); using the global pool");
                items.par_iter().map(&f).collect()
            }
        },
        None => items.par_iter().map(&f).collect(),
    }
}

/// Apply `f` to every item, returning results in input order.
#[cfg(not(feature = "parallel"))]
pub fn par_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    seq_map(items, f)
}

/// Sequential reference implementation of [`par_map`].
pub fn seq_map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    F: Fn(&T) -> R,
{
    items.iter().map(f).collect()
}
