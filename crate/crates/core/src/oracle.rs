//! Exact expectations on small discrete instances by brute-force enumeration.
//!
//! Every outcome tuple in `support^n` is visited once with its product
//! probability maintained incrementally (odometer order). Sums are
//! Neumaier-compensated.

use serde::{Deserialize, Serialize};

use crate::deletion::{DeletionPlan, DeletionPolicy};
use crate::error::{Error, Result};
use crate::estimators::EstimatorReport;

pub const MAX_ATOMS: usize = 6;
pub const MAX_N: usize = 10;
/// Limit on `support^n`.
pub const MAX_OUTCOMES: f64 = 1e7;
/// Limit on `support^n · C(n, k)` when averaging over random subsets.
pub const MAX_OUTCOME_SUBSETS: f64 = 1e8;

/// A finite-support law. JSON: `{"atoms": [[0, 0.5], [1, 0.5]]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteLaw {
    pub atoms: Vec<(f64, f64)>,
}

impl DiscreteLaw {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        let law = Self { atoms };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if self.atoms.is_empty() || self.atoms.len() > MAX_ATOMS {
            return Err(Error::InvalidArgument(format!(
                "a discrete law needs 1 to {MAX_ATOMS} atoms, got {}",
                self.atoms.len()
            )));
        }
        for &(v, p) in &self.atoms {
            if !v.is_finite() || !(p > 0.0) || !p.is_finite() {
                return Err(Error::InvalidArgument(format!("atom ({v}, {p}) needs a finite value and probability > 0")));
            }
        }
        let total: f64 = self.atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("atom probabilities sum to {total}, not 1")));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|(v, p)| p * (v - m) * (v - m)).sum()
    }
}

/// Exact expectations of the estimators (`E X̄`, `E S²`, `E X̃`, `E S̃ᵢ²`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    pub n: usize,
    pub k: usize,
    pub outcomes: u64,
    pub e_xbar: f64,
    pub e_s2: f64,
    pub e_xtilde: f64,
    pub e_s1t: f64,
    pub e_s2t: f64,
    pub e_s3t: f64,
}

impl ExactReport {
    /// Same order as [`EstimatorReport::as_array`].
    pub fn as_array(&self) -> [f64; 6] {
        [self.e_xbar, self.e_s2, self.e_xtilde, self.e_s1t, self.e_s2t, self.e_s3t]
    }
}

#[derive(Clone, Copy, Default)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All `k`-subsets of `0..n` as deletion masks, in lexicographic order.
fn subset_masks(n: usize, k: usize) -> Vec<Vec<bool>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut mask = vec![false; n];
        for &i in &idx {
            mask[i] = true;
        }
        out.push(mask);
        // Advance to the next combination.
        let mut j = k;
        loop {
            if j == 0 {
                return out;
            }
            j -= 1;
            if idx[j] < n - k + j {
                idx[j] += 1;
                for l in j + 1..k {
                    idx[l] = idx[l - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Deletion masks for the plan at size `n`, each with equal weight.
fn plan_masks(n: usize, plan: &DeletionPlan, outcomes: f64) -> Result<Vec<Vec<bool>>> {
    plan.schedule.validate()?;
    let k = plan.k_of_n(n);
    match plan.policy {
        DeletionPolicy::Prefix => Ok(vec![(0..n).map(|i| i < k).collect()]),
        DeletionPolicy::UniformRandom => {
            let size = outcomes * binomial(n, k);
            if size > MAX_OUTCOME_SUBSETS {
                return Err(Error::StateSpaceOverflow { size, limit: MAX_OUTCOME_SUBSETS });
            }
            Ok(subset_masks(n, k))
        }
        DeletionPolicy::ExtremalAbs => Err(Error::Unsupported(
            "exact enumeration covers index-blind policies only (prefix, uniform_random)".into(),
        )),
    }
}

/// Visit every outcome of `law^n` with its probability.
fn enumerate(law: &DiscreteLaw, n: usize, plan: &DeletionPlan, mut visit: impl FnMut(&[f64], f64, &[Vec<bool>])) -> Result<u64> {
    law.validate()?;
    if n == 0 || n > MAX_N {
        return Err(Error::InvalidArgument(format!("exact enumeration needs 1 <= n <= {MAX_N}, got {n}")));
    }
    let m = law.atoms.len();
    let outcomes = (m as f64).powi(n as i32);
    if outcomes > MAX_OUTCOMES {
        return Err(Error::StateSpaceOverflow { size: outcomes, limit: MAX_OUTCOMES });
    }
    let masks = plan_masks(n, plan, outcomes)?;

    let mut digits = vec![0usize; n];
    let mut values = vec![law.atoms[0].0; n];
    // prefix[i] = probability of the first i coordinates.
    let mut prefix = vec![1.0f64; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] * law.atoms[0].1;
    }
    let mut count = 0u64;
    loop {
        visit(&values, prefix[n], &masks);
        count += 1;
        let mut j = n;
        loop {
            if j == 0 {
                return Ok(count);
            }
            j -= 1;
            digits[j] += 1;
            if digits[j] < m {
                break;
            }
            digits[j] = 0;
        }
        for i in j..n {
            let (v, p) = law.atoms[digits[i]];
            values[i] = v;
            prefix[i + 1] = prefix[i] * p;
        }
    }
}

/// Exact expectations of all estimators under `plan`, averaging uniformly
/// over every `k`-subset for `UniformRandom`.
pub fn enumerate_expectations(law: &DiscreteLaw, n: usize, plan: &DeletionPlan) -> Result<ExactReport> {
    let mut acc = [Neumaier::default(); 6];
    let mut k = 0;
    let outcomes = enumerate(law, n, plan, |values, prob, masks| {
        let w = prob / masks.len() as f64;
        for mask in masks {
            let r = EstimatorReport::compute(values, mask);
            k = r.k;
            for (a, v) in acc.iter_mut().zip(r.as_array()) {
                a.add(w * v);
            }
        }
    })?;
    let e = acc.map(|a| a.value());
    Ok(ExactReport {
        n,
        k,
        outcomes,
        e_xbar: e[0],
        e_s2: e[1],
        e_xtilde: e[2],
        e_s1t: e[3],
        e_s2t: e[4],
        e_s3t: e[5],
    })
}

/// Exact `P(|X̃ - E ξ| ≥ eps)`.
pub fn exact_tail_prob(law: &DiscreteLaw, n: usize, plan: &DeletionPlan, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be non-negative, got {eps}")));
    }
    let mean = law.mean();
    let mut acc = Neumaier::default();
    enumerate(law, n, plan, |values, prob, masks| {
        let w = prob / masks.len() as f64;
        for mask in masks {
            let retained: f64 = values.iter().zip(mask).filter(|(_, d)| !**d).map(|(x, _)| x).sum();
            if (retained / n as f64 - mean).abs() >= eps {
                acc.add(w);
            }
        }
    })?;
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deletion::DeletionSchedule;
    use crate::estimators::expected_values;

    fn coin() -> DiscreteLaw {
        DiscreteLaw::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap()
    }

    fn fixed(k: usize, policy: DeletionPolicy) -> DeletionPlan {
        DeletionPlan::new(DeletionSchedule::Fixed { k }, policy)
    }

    fn fixtures() -> Vec<DiscreteLaw> {
        vec![
            coin(),
            DiscreteLaw::new(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap(),
            DiscreteLaw::new(vec![(0.0, 0.2), (1.0, 0.3), (5.0, 0.5)]).unwrap(),
            DiscreteLaw::new(vec![(-2.0, 0.25), (0.5, 0.25), (3.0, 0.125), (7.0, 0.375)]).unwrap(),
        ]
    }

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn coin_n4_k1() {
        let r = enumerate_expectations(&coin(), 4, &fixed(1, DeletionPolicy::Prefix)).unwrap();
        assert_eq!(r.outcomes, 16);
        assert!(close(r.e_xtilde, 0.375));
        assert!(close(r.e_s1t, 0.21875));
        assert!(close(r.e_s2t, 0.140625));
        assert!(close(r.e_s3t, 0.140625));
    }

    #[test]
    fn no_deletion_gives_classical_moments() {
        for law in fixtures() {
            let r = enumerate_expectations(&law, 5, &DeletionPlan::none()).unwrap();
            assert!(close(r.e_xbar, law.mean()));
            assert!(close(r.e_s2, 0.8 * law.variance()));
            assert_eq!(r.e_xtilde, r.e_xbar);
        }
    }

    #[test]
    fn point_mass_has_zero_spread() {
        let law = DiscreteLaw::new(vec![(3.0, 1.0)]).unwrap();
        let r = enumerate_expectations(&law, 6, &fixed(2, DeletionPolicy::UniformRandom)).unwrap();
        assert_eq!(r.e_s2, 0.0);
        assert_eq!(r.e_s2t, 0.0);
        // S̃₁² and S̃₃² measure spread around X̃, which is shrunk towards 0.
        assert!(close(r.e_s1t, 4.0 / 36.0 * 9.0));
    }

    #[test]
    fn agrees_with_closed_forms() {
        for law in fixtures() {
            let (mu, s2) = (law.mean(), law.variance());
            for n in 2..=8 {
                for k in 0..n {
                    let r = enumerate_expectations(&law, n, &fixed(k, DeletionPolicy::Prefix)).unwrap();
                    let c = expected_values(n, k, mu, s2).unwrap();
                    for (a, b) in [
                        (r.e_xtilde, c.e_xtilde),
                        (r.e_s1t, c.e_s1t),
                        (r.e_s2t, c.e_s2t),
                        (r.e_s3t, c.e_s3t),
                        (r.e_s2, c.e_s2),
                    ] {
                        assert!(close(a, b), "n={n} k={k}: {a} vs {b}");
                    }
                }
            }
        }
    }

    #[test]
    fn policies_are_exchangeable() {
        for law in fixtures() {
            for (n, k) in [(4, 1), (5, 2), (6, 3), (7, 6)] {
                let a = enumerate_expectations(&law, n, &fixed(k, DeletionPolicy::Prefix)).unwrap();
                let b = enumerate_expectations(&law, n, &fixed(k, DeletionPolicy::UniformRandom)).unwrap();
                for (x, y) in a.as_array().into_iter().zip(b.as_array()) {
                    assert!(close(x, y), "{x} vs {y}");
                }
            }
        }
    }

    #[test]
    fn tail_probabilities() {
        let plan = fixed(1, DeletionPolicy::Prefix);
        assert!(close(exact_tail_prob(&coin(), 4, &plan, 0.3).unwrap(), 0.125));
        assert_eq!(exact_tail_prob(&coin(), 4, &plan, 0.0).unwrap(), 1.0);
        assert_eq!(exact_tail_prob(&coin(), 4, &plan, 0.51).unwrap(), 0.0);
        let u = exact_tail_prob(&coin(), 4, &fixed(1, DeletionPolicy::UniformRandom), 0.3).unwrap();
        assert!(close(u, 0.125));
    }

    #[test]
    fn rejections() {
        let six = DiscreteLaw::new((0..6).map(|i| (i as f64, 1.0 / 6.0)).collect::<Vec<_>>());
        // 6 × (1/6) rounds to exactly 1 in binary.
        let six = six.unwrap();
        match enumerate_expectations(&six, 10, &DeletionPlan::none()) {
            Err(Error::StateSpaceOverflow { size, .. }) => assert_eq!(size, 60_466_176.0),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            enumerate_expectations(&coin(), 4, &fixed(1, DeletionPolicy::ExtremalAbs)),
            Err(Error::Unsupported(_))
        ));
        assert!(DiscreteLaw::new(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(DiscreteLaw::new(vec![(0.0, 0.0), (1.0, 1.0)]).is_err());
        assert!(DiscreteLaw::new((0..7).map(|i| (i as f64, 1.0 / 7.0)).collect()).is_err());
        assert!(enumerate_expectations(&coin(), 11, &DeletionPlan::none()).is_err());
        let law: DiscreteLaw = serde_json::from_str(r#"{"atoms":[[0,0.5],[1,0.5]]}"#).unwrap();
        assert_eq!(law, coin());
    }

    #[test]
    fn subset_enumeration() {
        assert_eq!(subset_masks(5, 2).len(), 10);
        assert_eq!(subset_masks(4, 0), vec![vec![false; 4]]);
        assert_eq!(binomial(10, 5), 252.0);
    }
}
