//! Replication scheduling.
//!
//! Work items are indexed replications. Results are collected in index order
//! and reduced sequentially, so the output is identical for any worker count
//! and with or without the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// How replications are executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Execution {
    /// `None` uses the global rayon pool; `Some(1)` runs on the calling thread.
    pub workers: Option<usize>,
}

impl Execution {
    pub fn sequential() -> Self {
        Self { workers: Some(1) }
    }

    pub fn parallel() -> Self {
        Self { workers: None }
    }

    pub fn with_workers(workers: usize) -> Self {
        Self { workers: Some(workers.max(1)) }
    }

    /// Map `f` over `0..count`, giving each worker its own scratch state from
    /// `init`. The returned vector is in replication order.
    pub fn map_reps<T, S, I, F>(&self, count: u64, init: I, f: F) -> Vec<T>
    where
        T: Send,
        I: Fn() -> S + Sync + Send,
        F: Fn(&mut S, u64) -> T + Sync + Send,
    {
        #[cfg(feature = "parallel")]
        {
            match self.workers {
                Some(1) => {}
                None => return (0..count).into_par_iter().map_init(&init, |s, i| f(s, i)).collect(),
                Some(w) => {
                    if let Ok(pool) = rayon::ThreadPoolBuilder::new().num_threads(w).build() {
                        return pool.install(|| (0..count).into_par_iter().map_init(&init, |s, i| f(s, i)).collect());
                    }
                }
            }
        }
        let mut state = init();
        (0..count).map(|i| f(&mut state, i)).collect()
    }
}

/// Neumaier-compensated sum in slice order.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Sample mean, unbiased sample variance, and the standard error of the mean.
pub fn mean_var_se(values: &[f64]) -> (f64, f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN, f64::NAN);
    }
    let mean = compensated_sum(values.iter().copied()) / n;
    if values.len() < 2 {
        return (mean, 0.0, 0.0);
    }
    let var = compensated_sum(values.iter().map(|v| (v - mean) * (v - mean))) / (n - 1.0);
    (mean, var, (var / n).sqrt())
}

/// Binomial proportion and its standard error.
pub fn proportion_se(hits: u64, trials: u64) -> (f64, f64) {
    let p = hits as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}
