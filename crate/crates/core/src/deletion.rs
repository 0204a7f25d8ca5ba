//! Deletion schedules `k*(n)` and index-selection policies producing `J_{k*}`.
//!
//! Indices are 0-based throughout: a selection for `n` values is a subset of
//! `0..n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// How many items to delete at sample size `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DeletionSchedule {
    Zero,
    /// A constant `k`, clamped to `n - 1`.
    Fixed { k: usize },
    /// `k(n) = ⌊n^r⌋` with `0 < r < 1`.
    Power { r: f64 },
    /// `k(n) = ⌊c n⌋` with `0 < c < 1`. Violates both negligibility conditions.
    Linear { c: f64 },
}

/// Which asymptotic negligibility conditions a schedule satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NegligibilityClass {
    /// `k/√n → 0`, hence also `k/n → 0`.
    LlnAndClt,
    /// `k/n → 0` but `k/√n` does not vanish.
    LlnOnly,
    /// `k/n` does not vanish.
    Violating,
}

impl DeletionSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Self::Power { r } if !(r > 0.0 && r < 1.0) => {
                Err(Error::InvalidArgument(format!("power schedule needs 0 < r < 1, got {r}")))
            }
            Self::Linear { c } if !(c > 0.0 && c < 1.0) => {
                Err(Error::InvalidArgument(format!("linear schedule needs 0 < c < 1, got {c}")))
            }
            _ => Ok(()),
        }
    }

    /// `k*(n)`, always in `0..n`.
    pub fn k_of_n(&self, n: usize) -> usize {
        if n == 0 {
            return 0;
        }
        let raw = match *self {
            Self::Zero => 0,
            Self::Fixed { k } => k,
            Self::Power { r } => floor_nudged((n as f64).powf(r)),
            Self::Linear { c } => floor_nudged(c * n as f64),
        };
        raw.min(n - 1)
    }

    pub fn negligibility_class(&self) -> NegligibilityClass {
        match *self {
            Self::Zero | Self::Fixed { .. } => NegligibilityClass::LlnAndClt,
            Self::Power { r } if r < 0.5 => NegligibilityClass::LlnAndClt,
            Self::Power { .. } => NegligibilityClass::LlnOnly,
            Self::Linear { .. } => NegligibilityClass::Violating,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Self::Zero => "zero".into(),
            Self::Fixed { k } => format!("fixed(k={k})"),
            Self::Power { r } => format!("power(r={r})"),
            Self::Linear { c } => format!("linear(c={c})"),
        }
    }
}

// Floor that tolerates `powf` landing a few ulps below an exact integer,
// e.g. 10000^0.25 evaluating to 9.999999999999998.
fn floor_nudged(x: f64) -> usize {
    let f = x.floor();
    let next = f + 1.0;
    if next - x <= 8.0 * f64::EPSILON * next {
        next as usize
    } else {
        f as usize
    }
}

/// Which `k` indices to delete.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionPolicy {
    /// The first `k` indices.
    Prefix,
    /// A uniformly random `k`-subset.
    UniformRandom,
    /// The `k` largest `|value|`, ties to the lowest index.
    ExtremalAbs,
}

/// A schedule together with a selection policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeletionPlan {
    pub schedule: DeletionSchedule,
    pub policy: DeletionPolicy,
}

impl DeletionPlan {
    pub fn new(schedule: DeletionSchedule, policy: DeletionPolicy) -> Self {
        Self { schedule, policy }
    }

    pub fn none() -> Self {
        Self::new(DeletionSchedule::Zero, DeletionPolicy::Prefix)
    }

    pub fn k_of_n(&self, n: usize) -> usize {
        self.schedule.k_of_n(n)
    }

    /// Deleted indices for the given values at `n = values.len()`.
    pub fn select(&self, values: &[f64], seed: u64) -> Result<Vec<usize>> {
        select_indices(self.policy, self.k_of_n(values.len()), values, seed)
    }

    pub fn label(&self) -> String {
        format!("{}/{}", self.schedule.label(), self.policy.label())
    }
}

impl DeletionPolicy {
    pub fn label(&self) -> &'static str {
        match self {
            Self::Prefix => "prefix",
            Self::UniformRandom => "uniform_random",
            Self::ExtremalAbs => "extremal_abs",
        }
    }
}

/// Select `k` distinct indices of `values` to delete, returned in ascending
/// order. `UniformRandom` uses a partial Fisher–Yates shuffle on a stream
/// derived from `seed`.
pub fn select_indices(policy: DeletionPolicy, k: usize, values: &[f64], seed: u64) -> Result<Vec<usize>> {
    let n = values.len();
    if k >= n {
        return Err(Error::DeletionTooLarge { k, n });
    }
    let mut scratch = Vec::new();
    let mut out = Vec::with_capacity(k);
    select_into(policy, k, values, &mut Stream::derive(seed, "select", 0), &mut scratch, &mut out);
    Ok(out)
}

/// Allocation-reusing form of [`select_indices`] for hot loops. Requires
/// `k < values.len()`; the caller supplies the selection stream.
pub(crate) fn select_into(
    policy: DeletionPolicy,
    k: usize,
    values: &[f64],
    stream: &mut Stream,
    scratch: &mut Vec<usize>,
    out: &mut Vec<usize>,
) {
    let n = values.len();
    debug_assert!(k < n);
    out.clear();
    match policy {
        DeletionPolicy::Prefix => out.extend(0..k),
        DeletionPolicy::UniformRandom => {
            scratch.clear();
            scratch.extend(0..n);
            for i in 0..k {
                let j = i + stream.next_below((n - i) as u64) as usize;
                scratch.swap(i, j);
            }
            out.extend_from_slice(&scratch[..k]);
            out.sort_unstable();
        }
        DeletionPolicy::ExtremalAbs => {
            if k == 0 {
                return;
            }
            scratch.clear();
            scratch.extend(0..n);
            let cmp = |a: &usize, b: &usize| values[*b].abs().total_cmp(&values[*a].abs()).then(a.cmp(b));
            scratch.select_nth_unstable_by(k - 1, cmp);
            out.extend_from_slice(&scratch[..k]);
            out.sort_unstable();
        }
    }
}

/// Boolean mask of length `n` with `true` at the given indices.
pub fn mask_from_indices(n: usize, indices: &[usize]) -> Vec<bool> {
    let mut mask = vec![false; n];
    for &i in indices {
        mask[i] = true;
    }
    mask
}
