//! Seeded Monte Carlo experiments for the deleting-items limit theorems.
//!
//! Replication `r` at sample size `n` draws its values from the stream
//! `(seed, "<experiment>/n=<n>", r)` and, for randomized deletion, its
//! selection from `(seed, "<experiment>/n=<n>/select", r)`. Path experiments
//! use one stream per path, extended incrementally.

use serde::{Deserialize, Serialize};

use super::curve::{ConvergenceCurve, Diagnostic, ExperimentMeta};
use super::exec::{mean_var_se, proportion_se, Execution};
use super::ks::{ks_statistic, KOLMOGOROV_SD};
use super::paths::PathDeletion;
use crate::deletion::{select_into, DeletionPlan, DeletionPolicy};
use crate::dist::{DistributionSpec, TriangularArraySpec};
use crate::error::{Error, Result};
use crate::rng::Stream;
use crate::special::standard_normal_cdf;

/// Default log-spaced grid.
pub const DEFAULT_N_GRID: [usize; 4] = [100, 1_000, 10_000, 100_000];
/// Default replications for tail-probability curves.
pub const DEFAULT_TAIL_REPS: u64 = 10_000;
/// Default replications for KS experiments.
pub const DEFAULT_KS_REPS: u64 = 2_000;

pub const SLLN_PROXY_NOTE: &str =
    "finite-horizon path proxy for almost-sure convergence: sup over [n, n_max] only";

/// Where the summands come from: an i.i.d. law or an independent,
/// non-identical triangular array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleSource {
    Iid(DistributionSpec),
    Array(TriangularArraySpec),
}

impl From<DistributionSpec> for SampleSource {
    fn from(d: DistributionSpec) -> Self {
        Self::Iid(d)
    }
}

impl From<TriangularArraySpec> for SampleSource {
    fn from(a: TriangularArraySpec) -> Self {
        Self::Array(a)
    }
}

impl SampleSource {
    pub fn description(&self) -> String {
        match self {
            Self::Iid(d) => d.name(),
            Self::Array(a) => a.description(),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::Iid(d) => d.validate(),
            Self::Array(a) => a.validate(),
        }
    }

    fn require_mean(&self) -> Result<()> {
        match self {
            Self::Iid(d) => d.require_mean().map(|_| ()),
            // Array rows are validated to have finite moments.
            Self::Array(_) => Ok(()),
        }
    }

    fn require_variance(&self) -> Result<()> {
        match self {
            Self::Iid(d) => d.require_variance().map(|_| ()).map_err(|e| match e {
                Error::VarianceRequired(msg) => Error::VarianceRequired(format!(
                    "{msg}; infinite-variance laws are only usable as CLT negative controls"
                )),
                other => other,
            }),
            Self::Array(_) => Ok(()),
        }
    }

    fn fill(&self, stream: &mut Stream, out: &mut [f64]) {
        match self {
            Self::Iid(d) => d.fill(stream, out),
            Self::Array(a) => a.fill(stream, out),
        }
    }

    /// `Σ_{i ≤ n} E ξ_i`.
    pub fn mean_sum(&self, n: usize) -> f64 {
        match self {
            Self::Iid(d) => n as f64 * d.mean(),
            Self::Array(a) => a.mean_sum(n),
        }
    }

    /// `B_n² = Σ_{i ≤ n} σ_i²`.
    pub fn b_n2(&self, n: usize) -> f64 {
        match self {
            Self::Iid(d) => n as f64 * d.variance(),
            Self::Array(a) => a.b_n2(n),
        }
    }
}

#[derive(Default)]
struct Scratch {
    values: Vec<f64>,
    perm: Vec<usize>,
    deleted: Vec<usize>,
}

fn grid_label(experiment: &str, n: usize) -> String {
    format!("{experiment}/n={n}")
}

/// Sum of `values` outside the ascending index list `deleted`, in index order.
fn retained_sum(values: &[f64], deleted: &[usize]) -> f64 {
    let mut s = 0.0;
    let mut next = deleted.iter().peekable();
    for (i, x) in values.iter().enumerate() {
        if next.peek() == Some(&&i) {
            next.next();
            continue;
        }
        s += x;
    }
    s
}

/// Draw one replication of size `n` and return the retained sum `S_{J∖J_{k*}}`.
fn replicate_retained_sum(
    source: &SampleSource,
    plan: &DeletionPlan,
    n: usize,
    seed: u64,
    label: &str,
    select_label: &str,
    rep: u64,
    scratch: &mut Scratch,
) -> f64 {
    scratch.values.resize(n, 0.0);
    let mut stream = Stream::derive(seed, label, rep);
    source.fill(&mut stream, &mut scratch.values);
    let k = plan.k_of_n(n);
    match plan.policy {
        DeletionPolicy::Prefix => scratch.values[k..].iter().sum(),
        policy => {
            let mut sel = Stream::derive(seed, select_label, rep);
            select_into(policy, k, &scratch.values, &mut sel, &mut scratch.perm, &mut scratch.deleted);
            retained_sum(&scratch.values, &scratch.deleted)
        }
    }
}

/// Retained sums for `reps` replications at size `n`, in replication order.
pub fn retained_sums(
    experiment: &str,
    source: &SampleSource,
    plan: &DeletionPlan,
    n: usize,
    reps: u64,
    seed: u64,
    exec: &Execution,
) -> Vec<f64> {
    let label = grid_label(experiment, n);
    let select_label = format!("{label}/select");
    exec.map_reps(reps, Scratch::default, |scratch, rep| {
        replicate_retained_sum(source, plan, n, seed, &label, &select_label, rep, scratch)
    })
}

fn check_grid(n_grid: &[usize]) -> Result<()> {
    if n_grid.is_empty() {
        return Err(Error::InvalidArgument("n_grid must not be empty".into()));
    }
    if n_grid.contains(&0) {
        return Err(Error::InvalidArgument("grid sizes must be at least 1".into()));
    }
    Ok(())
}

fn check_common(source: &SampleSource, plan: &DeletionPlan) -> Result<()> {
    source.validate()?;
    plan.schedule.validate()
}

/// Deleting WLLN tail probability `P(|X̃ - (1/n) Σ E ξ_i| ≥ ε)` over `n_grid`.
pub fn wlln_experiment(
    source: &SampleSource,
    plan: &DeletionPlan,
    eps: f64,
    n_grid: &[usize],
    reps: u64,
    seed: u64,
    exec: &Execution,
) -> Result<ConvergenceCurve> {
    check_common(source, plan)?;
    source.require_mean()?;
    check_grid(n_grid)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if reps < 100 {
        return Err(Error::InvalidArgument(format!("wlln needs at least 100 replications, got {reps}")));
    }
    let mut estimate = Vec::with_capacity(n_grid.len());
    let mut std_error = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let target = source.mean_sum(n) / n as f64;
        let sums = retained_sums("wlln", source, plan, n, reps, seed, exec);
        let hits = sums.iter().filter(|s| (*s / n as f64 - target).abs() >= eps).count() as u64;
        let (p, se) = proportion_se(hits, reps);
        estimate.push(p);
        std_error.push(se);
    }
    Ok(ConvergenceCurve {
        n_grid: n_grid.to_vec(),
        estimate,
        std_error,
        diagnostic: Diagnostic::TailProb,
        metadata: ExperimentMeta {
            experiment: "wlln".into(),
            source: source.description(),
            plan: *plan,
            master_seed: seed,
            replications: reps,
            eps: Some(eps),
            notes: vec![],
        },
    })
}

/// Monte Carlo mean of `D² / (1 + D²)`, `D = X̃ - (1/n) Σ E ξ_i`.
pub fn bounded_functional(
    source: &SampleSource,
    plan: &DeletionPlan,
    n_grid: &[usize],
    reps: u64,
    seed: u64,
    exec: &Execution,
) -> Result<ConvergenceCurve> {
    check_common(source, plan)?;
    source.require_mean()?;
    check_grid(n_grid)?;
    if reps < 2 {
        return Err(Error::InvalidArgument("bounded functional needs at least 2 replications".into()));
    }
    let mut estimate = Vec::with_capacity(n_grid.len());
    let mut std_error = Vec::with_capacity(n_grid.len());
    for &n in n_grid {
        let target = source.mean_sum(n) / n as f64;
        let sums = retained_sums("bounded_functional", source, plan, n, reps, seed, exec);
        let f: Vec<f64> = sums
            .iter()
            .map(|s| {
                let d = s / n as f64 - target;
                d * d / (1.0 + d * d)
            })
            .collect();
        let (m, _, se) = mean_var_se(&f);
        estimate.push(m);
        std_error.push(se);
    }
    Ok(ConvergenceCurve {
        n_grid: n_grid.to_vec(),
        estimate,
        std_error,
        diagnostic: Diagnostic::BoundedFunctional,
        metadata: ExperimentMeta {
            experiment: "bounded_functional".into(),
            source: source.description(),
            plan: *plan,
            master_seed: seed,
            replications: reps,
            eps: None,
            notes: vec![],
        },
    })
}

/// Checkpoints `n_start, 10 n_start, …` below `n_max`, then `n_max`.
pub fn decade_grid(n_start: usize, n_max: usize) -> Vec<usize> {
    let mut g = Vec::new();
    let mut n = n_start.max(1);
    while n < n_max {
        g.push(n);
        n = n.saturating_mul(10);
    }
    g.push(n_max);
    g
}

/// Finite-horizon SLLN proxy.
///
/// Each path is extended one draw at a time to `n_max`. The estimate at a
/// checkpoint `n` is the fraction of paths with
/// `sup_{n ≤ m ≤ n_max} |X̃_m - μ| < ε`, so it is non-decreasing in `n`.
pub fn slln_proxy(
    dist: &DistributionSpec,
    plan: &DeletionPlan,
    eps: f64,
    n_grid: &[usize],
    n_max: usize,
    paths: u64,
    seed: u64,
    exec: &Execution,
) -> Result<ConvergenceCurve> {
    dist.validate()?;
    plan.schedule.validate()?;
    let mu = dist.require_mean()?;
    check_grid(n_grid)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    if paths == 0 {
        return Err(Error::InvalidArgument("slln needs at least one path".into()));
    }
    if n_grid.windows(2).any(|w| w[0] >= w[1]) || *n_grid.last().unwrap() > n_max {
        return Err(Error::InvalidArgument(format!(
            "checkpoints must be strictly increasing and at most n_max = {n_max}"
        )));
    }
    let grid = n_grid.to_vec();
    let per_path: Vec<Vec<bool>> = exec.map_reps(
        paths,
        || (),
        |_, path| {
            let mut stream = Stream::derive(seed, "slln", path);
            let mut tracker = PathDeletion::new(*plan, Stream::derive(seed, "slln/select", path), n_max);
            let mut seg_max = vec![0.0f64; grid.len()];
            let mut seg = 0usize;
            let mut total = 0.0;
            for m in 1..=n_max {
                let x = dist.draw(&mut stream);
                total += x;
                tracker.push(x);
                if m < grid[0] {
                    continue;
                }
                while seg + 1 < grid.len() && m >= grid[seg + 1] {
                    seg += 1;
                }
                let dev = ((total - tracker.deleted_sum()) / m as f64 - mu).abs();
                if dev > seg_max[seg] {
                    seg_max[seg] = dev;
                }
            }
            let mut sup = 0.0f64;
            let mut ok = vec![false; grid.len()];
            for j in (0..grid.len()).rev() {
                sup = sup.max(seg_max[j]);
                ok[j] = sup < eps;
            }
            ok
        },
    );
    let mut estimate = Vec::with_capacity(grid.len());
    let mut std_error = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let hits = per_path.iter().filter(|p| p[j]).count() as u64;
        let (p, se) = proportion_se(hits, paths);
        estimate.push(p);
        std_error.push(se);
    }
    Ok(ConvergenceCurve {
        n_grid: grid,
        estimate,
        std_error,
        diagnostic: Diagnostic::PathProxy,
        metadata: ExperimentMeta {
            experiment: "slln".into(),
            source: dist.name(),
            plan: *plan,
            master_seed: seed,
            replications: paths,
            eps: Some(eps),
            notes: vec![SLLN_PROXY_NOTE.into(), format!("n_max = {n_max}")],
        },
    })
}

/// Mean over paths of `|S̃_n| / (√n (ln n)^{1/2 + ε})` for a zero-mean law.
pub fn log_scaling_experiment(
    dist: &DistributionSpec,
    plan: &DeletionPlan,
    eps_exponent: f64,
    n_grid: &[usize],
    paths: u64,
    seed: u64,
    exec: &Execution,
) -> Result<ConvergenceCurve> {
    dist.validate()?;
    plan.schedule.validate()?;
    let mu = dist.require_mean()?;
    if mu != 0.0 {
        return Err(Error::InvalidArgument(format!("log scaling needs a zero-mean law, {} has mean {mu}", dist.name())));
    }
    dist.require_variance()?;
    check_grid(n_grid)?;
    if n_grid.iter().any(|&n| n < 2) {
        return Err(Error::InvalidArgument("log scaling needs n >= 2".into()));
    }
    if !(eps_exponent > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps_exponent}")));
    }
    if paths < 2 {
        return Err(Error::InvalidArgument("log scaling needs at least 2 paths".into()));
    }
    let mut grid = n_grid.to_vec();
    grid.sort_unstable();
    grid.dedup();
    let n_max = *grid.last().unwrap();
    let per_path: Vec<Vec<f64>> = exec.map_reps(paths, Scratch::default, |scratch, path| {
        let mut stream = Stream::derive(seed, "log_scaling", path);
        scratch.values.clear();
        let mut out = Vec::with_capacity(grid.len());
        for &n in &grid {
            while scratch.values.len() < n {
                scratch.values.push(dist.draw(&mut stream));
            }
            let k = plan.k_of_n(n);
            let mut sel = Stream::derive(seed, &format!("log_scaling/select/n={n}"), path);
            select_into(plan.policy, k, &scratch.values[..n], &mut sel, &mut scratch.perm, &mut scratch.deleted);
            let s = retained_sum(&scratch.values[..n], &scratch.deleted);
            let nf = n as f64;
            out.push(s.abs() / (nf.sqrt() * nf.ln().powf(0.5 + eps_exponent)));
        }
        debug_assert_eq!(scratch.values.len(), n_max);
        out
    });
    let mut estimate = Vec::with_capacity(grid.len());
    let mut std_error = Vec::with_capacity(grid.len());
    for j in 0..grid.len() {
        let col: Vec<f64> = per_path.iter().map(|p| p[j]).collect();
        let (m, _, se) = mean_var_se(&col);
        estimate.push(m);
        std_error.push(se);
    }
    Ok(ConvergenceCurve {
        n_grid: grid,
        estimate,
        std_error,
        diagnostic: Diagnostic::LogScaled,
        metadata: ExperimentMeta {
            experiment: "log_scaling".into(),
            source: dist.name(),
            plan: *plan,
            master_seed: seed,
            replications: paths,
            eps: Some(eps_exponent),
            notes: vec![],
        },
    })
}

/// Outcome of a CLT experiment at one sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CltResult {
    pub n: usize,
    pub k: usize,
    pub reps: u64,
    /// KS distance of the standardized statistic to `Φ`.
    pub ks: f64,
    pub stat_mean: f64,
    pub stat_var: f64,
}

/// Standardized deleting sums `(S̃ - Σ_{i ≤ n} μ_i) / B_n` (which is
/// `(S̃ - nμ) / (√n σ)` for i.i.d. laws) and their KS distance to `Φ`.
pub fn clt_experiment(
    source: &SampleSource,
    plan: &DeletionPlan,
    n: usize,
    reps: u64,
    seed: u64,
    exec: &Execution,
) -> Result<CltResult> {
    check_common(source, plan)?;
    source.require_variance()?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    if reps < 1000 {
        return Err(Error::InvalidArgument(format!("clt needs at least 1000 replications, got {reps}")));
    }
    let centre = source.mean_sum(n);
    let scale = source.b_n2(n).sqrt();
    let stats: Vec<f64> = retained_sums("clt", source, plan, n, reps, seed, exec)
        .into_iter()
        .map(|s| (s - centre) / scale)
        .collect();
    let ks = ks_statistic(&stats, standard_normal_cdf)?;
    let (stat_mean, stat_var, _) = mean_var_se(&stats);
    Ok(CltResult { n, k: plan.k_of_n(n), reps, ks, stat_mean, stat_var })
}

/// [`clt_experiment`] over a grid, as a KS curve. The standard error column
/// is the null-scale spread `KOLMOGOROV_SD / √reps`.
pub fn clt_curve(
    source: &SampleSource,
    plan: &DeletionPlan,
    n_grid: &[usize],
    reps: u64,
    seed: u64,
    exec: &Execution,
) -> Result<(ConvergenceCurve, Vec<CltResult>)> {
    check_grid(n_grid)?;
    let results = n_grid
        .iter()
        .map(|&n| clt_experiment(source, plan, n, reps, seed, exec))
        .collect::<Result<Vec<_>>>()?;
    let curve = ConvergenceCurve {
        n_grid: n_grid.to_vec(),
        estimate: results.iter().map(|r| r.ks).collect(),
        std_error: vec![KOLMOGOROV_SD / (reps as f64).sqrt(); n_grid.len()],
        diagnostic: Diagnostic::KsDistance,
        metadata: ExperimentMeta {
            experiment: "clt".into(),
            source: source.description(),
            plan: *plan,
            master_seed: seed,
            replications: reps,
            eps: None,
            notes: vec![],
        },
    };
    Ok((curve, results))
}
