//! Replication fan-out. With the `parallel` feature the work runs on a rayon
//! pool; without it, or with `jobs == 1`, it runs in a plain loop. Results are
//! always returned in replication order.

use crate::error::{Error, Result};

/// Evaluates `f(0..reps)` with up to `jobs` worker threads (`0` means all
/// available cores).
pub fn replicate<T, F>(reps: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if jobs == 1 || reps <= 1 {
        return (0..reps).map(&f).collect();
    }
    run_pool(reps, jobs, f)
}

#[cfg(feature = "parallel")]
fn run_pool<T, F>(reps: usize, jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    pool.install(|| (0..reps).into_par_iter().map(&f).collect())
}

#[cfg(not(feature = "parallel"))]
fn run_pool<T, F>(reps: usize, _jobs: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    (0..reps).map(&f).collect()
}

/// Whether the crate was built with the rayon backend.
pub const fn parallel_enabled() -> bool {
    cfg!(feature = "parallel")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_is_preserved() {
        for jobs in [0, 1, 2, 4] {
            let v = replicate(37, jobs, |i| Ok(i * i)).unwrap();
            assert_eq!(v, (0..37).map(|i| i * i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn first_error_surfaces() {
        let r: Result<Vec<usize>> = replicate(10, 2, |i| {
            if i == 6 {
                Err(Error::InvalidArgument("six".into()))
            } else {
                Ok(i)
            }
        });
        assert!(r.is_err());
        assert!(replicate(0, 3, Ok::<usize, crate::Error>)
            .unwrap()
            .is_empty());
    }
}
