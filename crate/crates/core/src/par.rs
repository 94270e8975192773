//! Trial-level parallelism. Trials are keyed by index, so sums do not depend on scheduling.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Environment variable that caps the worker count.
pub const THREADS_VAR: &str = "STRETCHPERC_THREADS";

#[cfg(feature = "parallel")]
fn pool() -> Option<&'static rayon::ThreadPool> {
    use std::sync::OnceLock;
    static POOL: OnceLock<Option<rayon::ThreadPool>> = OnceLock::new();
    POOL.get_or_init(|| {
        let n: usize = std::env::var(THREADS_VAR).ok()?.parse().ok()?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .ok()
    })
    .as_ref()
}

/// `Σ_{t < trials} f(t)`.
pub fn sum_trials<F>(trials: u64, f: F) -> u64
where
    F: Fn(u64) -> u64 + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        let run = || (0..trials).into_par_iter().map(&f).sum();
        match pool() {
            Some(p) => p.install(run),
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..trials).map(f).sum()
    }
}

/// Element-wise sum of per-trial count vectors of length `width`.
pub fn sum_vectors<F>(trials: u64, width: usize, f: F) -> Vec<u64>
where
    F: Fn(u64, &mut [u64]) + Sync + Send,
{
    let add = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    #[cfg(feature = "parallel")]
    {
        let run = || {
            (0..trials)
                .into_par_iter()
                .fold(
                    || vec![0u64; width],
                    |mut acc, t| {
                        f(t, &mut acc);
                        acc
                    },
                )
                .reduce(|| vec![0u64; width], add)
        };
        match pool() {
            Some(p) => p.install(run),
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        let _ = add;
        let mut acc = vec![0u64; width];
        for t in 0..trials {
            f(t, &mut acc);
        }
        acc
    }
}

/// Ordered map over trial indices, fallible.
pub fn try_map<T, F>(n: u64, f: F) -> crate::Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> crate::Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        let run = || (0..n).into_par_iter().map(&f).collect();
        match pool() {
            Some(p) => p.install(run),
            None => run(),
        }
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}
