//! Incremental deletion along a growing path `ξ_1, ξ_2, …`.
//!
//! At every length `m` the tracker holds a deletion set of size `k*(m)` and
//! its sum. `k*(m)` is non-decreasing in `m` for every schedule, so sets only
//! grow, apart from swaps forced by a newly arrived value.
//!
//! - `Prefix` deletes the first `k*(m)` indices.
//! - `ExtremalAbs` keeps the `k*(m)` largest `|ξ_i|`, ties to the lowest index.
//! - `UniformRandom` gives each index an independent random priority and keeps
//!   the `k*(m)` lowest. For each fixed `m` this is a uniform `k*(m)`-subset of
//!   `{1..m}`, independent of the values.

use std::collections::BTreeSet;

use crate::deletion::{DeletionPlan, DeletionPolicy, DeletionSchedule};
use crate::rng::Stream;

type Key = (u64, usize);

pub(crate) struct PathDeletion {
    plan: DeletionPlan,
    values: Vec<f64>,
    deleted_sum: f64,
    chosen: BTreeSet<Key>,
    rest: BTreeSet<Key>,
    prefix_k: usize,
    priorities: Stream,
}

impl PathDeletion {
    pub(crate) fn new(plan: DeletionPlan, priorities: Stream, capacity: usize) -> Self {
        Self {
            plan,
            values: Vec::with_capacity(capacity),
            deleted_sum: 0.0,
            chosen: BTreeSet::new(),
            rest: BTreeSet::new(),
            prefix_k: 0,
            priorities,
        }
    }

    #[cfg(test)]
    pub(crate) fn len(&self) -> usize {
        self.values.len()
    }

    /// Append the next value and update the deletion set to `k*(len)`.
    pub(crate) fn push(&mut self, x: f64) {
        let idx = self.values.len();
        self.values.push(x);
        let m = idx + 1;
        if matches!(self.plan.schedule, DeletionSchedule::Zero) {
            return;
        }
        let k = self.plan.k_of_n(m);
        match self.plan.policy {
            DeletionPolicy::Prefix => {
                while self.prefix_k < k {
                    self.deleted_sum += self.values[self.prefix_k];
                    self.prefix_k += 1;
                }
            }
            DeletionPolicy::ExtremalAbs => {
                let key = (!x.abs().to_bits(), idx);
                self.insert(key, k);
            }
            DeletionPolicy::UniformRandom => {
                let key = (self.priorities.next_u64(), idx);
                self.insert(key, k);
            }
        }
    }

    fn insert(&mut self, key: Key, k: usize) {
        self.rest.insert(key);
        while self.chosen.len() < k {
            let best = self.rest.pop_first().expect("k < m leaves a candidate");
            self.deleted_sum += self.values[best.1];
            self.chosen.insert(best);
        }
        while let (Some(&best), Some(&worst)) = (self.rest.first(), self.chosen.last()) {
            if best >= worst {
                break;
            }
            self.rest.pop_first();
            self.chosen.pop_last();
            self.deleted_sum += self.values[best.1] - self.values[worst.1];
            self.chosen.insert(best);
            self.rest.insert(worst);
        }
    }

    #[cfg(test)]
    pub(crate) fn deleted_count(&self) -> usize {
        match self.plan.policy {
            DeletionPolicy::Prefix => self.prefix_k,
            _ => self.chosen.len(),
        }
    }

    pub(crate) fn deleted_sum(&self) -> f64 {
        self.deleted_sum
    }

    /// Deleted indices in ascending order.
    #[cfg(test)]
    pub(crate) fn deleted_indices(&self) -> Vec<usize> {
        match self.plan.policy {
            DeletionPolicy::Prefix => (0..self.prefix_k).collect(),
            _ => {
                let mut v: Vec<usize> = self.chosen.iter().map(|k| k.1).collect();
                v.sort_unstable();
                v
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deletion::select_indices;

    #[test]
    fn extremal_tracker_matches_batch_selection() {
        let values = crate::dist::DistributionSpec::normal(0.0, 1.0).unwrap().sample(3000, 8).unwrap();
        for schedule in [DeletionSchedule::Fixed { k: 4 }, DeletionSchedule::Power { r: 0.6 }, DeletionSchedule::Linear { c: 0.3 }] {
            let plan = DeletionPlan::new(schedule, DeletionPolicy::ExtremalAbs);
            let mut t = PathDeletion::new(plan, Stream::from_seed(0), values.len());
            for (m, x) in values.iter().enumerate() {
                t.push(*x);
                let n = m + 1;
                if n % 97 == 0 || n == values.len() {
                    let batch = select_indices(DeletionPolicy::ExtremalAbs, plan.k_of_n(n), &values[..n], 0).unwrap();
                    assert_eq!(t.deleted_indices(), batch);
                    let s: f64 = batch.iter().map(|&i| values[i]).sum();
                    assert!((t.deleted_sum() - s).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn prefix_tracker_and_counts() {
        let plan = DeletionPlan::new(DeletionSchedule::Power { r: 0.5 }, DeletionPolicy::Prefix);
        let mut t = PathDeletion::new(plan, Stream::from_seed(0), 200);
        for i in 0..200 {
            t.push(i as f64);
            assert_eq!(t.deleted_count(), plan.k_of_n(t.len()));
        }
        let k = plan.k_of_n(200);
        assert_eq!(t.deleted_sum(), (0..k).map(|i| i as f64).sum::<f64>());
    }

    #[test]
    fn random_tracker_marginal_is_uniform() {
        // k*(4) = 1 for FixedK(1); each index should be deleted with prob. 1/4.
        let plan = DeletionPlan::new(DeletionSchedule::Fixed { k: 1 }, DeletionPolicy::UniformRandom);
        let reps = 40_000;
        let mut counts = [0u32; 4];
        for r in 0..reps {
            let mut t = PathDeletion::new(plan, Stream::derive(1, "prio", r), 4);
            for _ in 0..4 {
                t.push(0.0);
            }
            counts[t.deleted_indices()[0]] += 1;
        }
        let tol = 3.0 * (0.1875f64 / reps as f64).sqrt();
        for c in counts {
            assert!((c as f64 / reps as f64 - 0.25).abs() < tol, "{counts:?}");
        }
    }
}
