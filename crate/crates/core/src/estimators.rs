//! Deleting-items sums and the six mean/variance estimators.
//!
//! All estimators divide by `n`, never by the number of retained items, so the
//! deleting estimators are biased; [`expected_values`] gives the exact bias.

use serde::{Deserialize, Serialize};

use crate::deletion::mask_from_indices;
use crate::error::{Error, Result};

/// Values with a deletion mask (`true` = deleted).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFrame {
    values: Vec<f64>,
    deleted: Vec<bool>,
    k: usize,
}

impl SampleFrame {
    pub fn new(values: Vec<f64>, deleted: Vec<bool>) -> Result<Self> {
        if values.len() != deleted.len() {
            return Err(Error::InvalidArgument(format!(
                "mask length {} differs from value count {}",
                deleted.len(),
                values.len()
            )));
        }
        let k = deleted.iter().filter(|d| **d).count();
        if k >= values.len() {
            return Err(Error::DeletionTooLarge { k, n: values.len() });
        }
        Ok(Self { values, deleted, k })
    }

    /// Frame deleting the given (0-based) indices.
    pub fn with_deleted_indices(values: Vec<f64>, indices: &[usize]) -> Result<Self> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= values.len()) {
            return Err(Error::InvalidArgument(format!("index {bad} out of range for {} values", values.len())));
        }
        let mask = mask_from_indices(values.len(), indices);
        Self::new(values, mask)
    }

    /// Frame deleting the first `k` values.
    pub fn with_prefix_deleted(values: Vec<f64>, k: usize) -> Result<Self> {
        let n = values.len();
        let mask = (0..n).map(|i| i < k).collect();
        Self::new(values, mask)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn deleted(&self) -> &[bool] {
        &self.deleted
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn deleted_sum(&self) -> f64 {
        deleted_sum(&self.values, &self.deleted)
    }

    pub fn report(&self) -> EstimatorReport {
        EstimatorReport::compute(&self.values, &self.deleted)
    }

    pub fn expansion_residuals(&self) -> ExpansionResiduals {
        expansion_residuals(&self.values, &self.deleted)
    }
}

/// `S_{J∖J_k}`: the sum of retained values in ascending index order.
pub fn deleted_sum(values: &[f64], deleted: &[bool]) -> f64 {
    let mut s = 0.0;
    for (x, d) in values.iter().zip(deleted) {
        if !d {
            s += x;
        }
    }
    s
}

/// The six statistics for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorReport {
    pub xbar: f64,
    pub s2: f64,
    pub xtilde: f64,
    pub s1t: f64,
    pub s2t: f64,
    pub s3t: f64,
    pub n: usize,
    pub k: usize,
}

impl EstimatorReport {
    /// Evaluate every estimator from its defining sum.
    pub fn compute(values: &[f64], deleted: &[bool]) -> Self {
        let n = values.len();
        let nf = n as f64;
        let mut total = 0.0;
        let mut retained = 0.0;
        let mut k = 0;
        for (x, d) in values.iter().zip(deleted) {
            total += x;
            if *d {
                k += 1;
            } else {
                retained += x;
            }
        }
        let xbar = total / nf;
        let xtilde = retained / nf;
        let (mut s2, mut s1t, mut s2t, mut s3t) = (0.0, 0.0, 0.0, 0.0);
        for (x, d) in values.iter().zip(deleted) {
            let dev_bar = x - xbar;
            let dev_tilde = x - xtilde;
            s2 += dev_bar * dev_bar;
            s1t += dev_tilde * dev_tilde;
            if !d {
                s2t += dev_bar * dev_bar;
                s3t += dev_tilde * dev_tilde;
            }
        }
        Self { xbar, s2: s2 / nf, xtilde, s1t: s1t / nf, s2t: s2t / nf, s3t: s3t / nf, n, k }
    }

    pub fn as_array(&self) -> [f64; 6] {
        [self.xbar, self.s2, self.xtilde, self.s1t, self.s2t, self.s3t]
    }
}

/// Differences between the defining sums and their algebraic expansions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpansionResiduals {
    pub s1t: f64,
    pub s2t: f64,
    pub s3t: f64,
    /// Largest absolute term entering the expansions, for relative tolerances.
    pub magnitude: f64,
}

impl ExpansionResiduals {
    pub fn max_abs(&self) -> f64 {
        self.s1t.abs().max(self.s2t.abs()).max(self.s3t.abs())
    }

    /// `max |residual| <= tol * (1 + magnitude)`.
    pub fn within(&self, tol: f64) -> bool {
        self.max_abs() <= tol * (1.0 + self.magnitude)
    }
}

pub fn expansion_residuals(values: &[f64], deleted: &[bool]) -> ExpansionResiduals {
    let r = EstimatorReport::compute(values, deleted);
    let nf = r.n as f64;
    let kf = r.k as f64;
    let mut sq_all = 0.0;
    let mut sq_kept = 0.0;
    for (x, d) in values.iter().zip(deleted) {
        sq_all += x * x;
        if !d {
            sq_kept += x * x;
        }
    }
    let m_all = sq_all / nf;
    let m_kept = sq_kept / nf;
    let cross = 2.0 * r.xtilde * r.xbar;
    let e1 = m_all - cross + r.xtilde * r.xtilde;
    let e2 = m_kept - cross + (1.0 - kf / nf) * r.xbar * r.xbar;
    let e3 = m_kept - (1.0 + kf / nf) * r.xtilde * r.xtilde;
    let magnitude = [m_all, m_kept, cross, r.xtilde * r.xtilde, r.xbar * r.xbar]
        .into_iter()
        .fold(0.0f64, |a, b| a.max(b.abs()));
    ExpansionResiduals { s1t: r.s1t - e1, s2t: r.s2t - e2, s3t: r.s3t - e3, magnitude }
}

/// Position of `E S̃₃²` relative to `E S²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum S3Class {
    BelowOrEqual,
    Above,
    /// `μ = 0` and `k ≥ 1`: strictly below.
    MuZeroBelow,
}

/// Exact expectations of the estimators for i.i.d. draws with mean `mu` and
/// variance `sigma2`, `k` of `n` deleted by an index-blind policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub n: usize,
    pub k: usize,
    pub mu: f64,
    pub sigma2: f64,
    pub e_xtilde: f64,
    pub e_s1t: f64,
    pub e_s2t: f64,
    pub e_s3t: f64,
    pub e_s2: f64,
    pub s3_class: S3Class,
    /// `n - (n² - 1) σ² / μ²`, or `None` when `μ = 0`.
    pub threshold: Option<f64>,
}

/// Closed-form expectations.
///
/// ```text
/// E X̃   = (1 - k/n) μ
/// E S̃₁² = (1 - 1/n + k/n²) σ² + (k²/n²) μ²
/// E S̃₂² = (1 - 1/n - k/n + k/n²) σ²
/// E S̃₃² = (1 - 1/n - k/n + k²/n³) σ² + (1 - k/n)(k²/n²) μ²
/// E S²  = (1 - 1/n) σ²
/// ```
///
/// `s3_class` follows the exact sign of `E S̃₃² - E S²`, which is the sign of
/// `k (n - k) μ² - (n² - k) σ²` for `k ≥ 1`. For `k = 1` this reduces to
/// `k ≥ threshold`; for larger `k` the two can disagree, see
/// [`threshold_rule_class`].
pub fn expected_values(n: usize, k: usize, mu: f64, sigma2: f64) -> Result<BiasReport> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("expected values need n >= 2, got {n}")));
    }
    if k >= n {
        return Err(Error::DeletionTooLarge { k, n });
    }
    if !(sigma2 >= 0.0) || !sigma2.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidArgument(format!("need finite mu and sigma2 >= 0, got {mu}, {sigma2}")));
    }
    let nf = n as f64;
    let kf = k as f64;
    let mu2 = mu * mu;
    let e_xtilde = (1.0 - kf / nf) * mu;
    let e_s1t = (1.0 - 1.0 / nf + kf / (nf * nf)) * sigma2 + (kf * kf) / (nf * nf) * mu2;
    let e_s2t = (1.0 - 1.0 / nf - kf / nf + kf / (nf * nf)) * sigma2;
    let e_s3t = (1.0 - 1.0 / nf - kf / nf + kf * kf / (nf * nf * nf)) * sigma2
        + (1.0 - kf / nf) * (kf * kf) / (nf * nf) * mu2;
    let e_s2 = (1.0 - 1.0 / nf) * sigma2;

    let s3_class = if k == 0 {
        S3Class::BelowOrEqual
    } else if mu == 0.0 {
        S3Class::MuZeroBelow
    } else if kf * (nf - kf) * mu2 <= (nf * nf - kf) * sigma2 {
        S3Class::BelowOrEqual
    } else {
        S3Class::Above
    };
    let threshold = (mu != 0.0).then(|| nf - (nf * nf - 1.0) * sigma2 / mu2);

    Ok(BiasReport { n, k, mu, sigma2, e_xtilde, e_s1t, e_s2t, e_s3t, e_s2, s3_class, threshold })
}

/// The single-threshold rule: `μ = 0` → below; otherwise below-or-equal iff
/// `k ≥ n - (n² - 1) σ² / μ²`. Exact for `k = 1` only.
pub fn threshold_rule_class(n: usize, k: usize, mu: f64, sigma2: f64) -> S3Class {
    if mu == 0.0 {
        return S3Class::MuZeroBelow;
    }
    let nf = n as f64;
    if k as f64 >= nf - (nf * nf - 1.0) * sigma2 / (mu * mu) {
        S3Class::BelowOrEqual
    } else {
        S3Class::Above
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn deleted_sum_examples() {
        let f = SampleFrame::with_deleted_indices(vec![1.0, 2.0, 3.0], &[1]).unwrap();
        assert_eq!(f.deleted_sum(), 4.0);
        let f = SampleFrame::with_deleted_indices(vec![1.0, 2.0, 3.0], &[]).unwrap();
        assert_eq!(f.deleted_sum(), 6.0);
        let f = SampleFrame::with_deleted_indices(vec![2.5; 8], &[0, 3, 7]).unwrap();
        assert_eq!(f.deleted_sum(), 5.0 * 2.5);
    }

    #[test]
    fn frame_validation() {
        assert!(SampleFrame::new(vec![1.0, 2.0], vec![true, true]).is_err());
        assert!(SampleFrame::new(vec![1.0, 2.0], vec![true]).is_err());
        assert!(SampleFrame::with_deleted_indices(vec![1.0, 2.0], &[2]).is_err());
    }

    #[test]
    fn report_examples() {
        let r = SampleFrame::with_prefix_deleted(vec![1.0; 4], 1).unwrap().report();
        assert_eq!((r.xbar, r.xtilde, r.s2), (1.0, 0.75, 0.0));
        assert_eq!(r.s3t, 0.046875);
        let r = SampleFrame::with_deleted_indices(vec![0.0, 1.0], &[1]).unwrap().report();
        assert_eq!(r.xtilde, 0.0);
        assert_eq!(r.s1t, 0.5);
    }

    #[test]
    fn n2_residual_is_zero() {
        let f = SampleFrame::with_deleted_indices(vec![0.0, 1.0], &[1]).unwrap();
        assert_eq!(f.expansion_residuals().s1t, 0.0);
    }

    #[test]
    fn residuals_on_random_and_constant_frames() {
        let values = crate::dist::DistributionSpec::normal(3.0, 2.0).unwrap().sample(100, 17).unwrap();
        let f = SampleFrame::with_deleted_indices(values, &[3, 10, 50, 99]).unwrap();
        assert!(f.expansion_residuals().within(1e-10));
        let f = SampleFrame::with_prefix_deleted(vec![0.5; 16], 4).unwrap();
        assert!(f.expansion_residuals().max_abs() <= 1e-12);
    }

    #[test]
    fn expected_value_examples() {
        let b = expected_values(10, 2, 0.0, 1.0).unwrap();
        assert_eq!(b.e_xtilde, 0.0);
        assert!((b.e_s1t - 0.92).abs() < 1e-15);
        assert!((b.e_s2t - 0.72).abs() < 1e-15);
        // Exact enumeration over Rademacher 10-tuples yields 0.704.
        assert!((b.e_s3t - 0.704).abs() < 1e-15);
        assert!((b.e_s2 - 0.9).abs() < 1e-15);
        assert_eq!(b.s3_class, S3Class::MuZeroBelow);

        let b = expected_values(4, 1, 0.5, 0.25).unwrap();
        assert_eq!(b.e_xtilde, 0.375);
        assert!((b.e_s1t - 0.21875).abs() < 1e-15);
        assert!((b.e_s2t - 0.140625).abs() < 1e-15);
        assert!((b.e_s3t - 0.140625).abs() < 1e-15);
        assert!((b.e_s2 - 0.1875).abs() < 1e-15);
        assert_eq!(b.threshold, Some(-11.0));
        assert_eq!(b.s3_class, S3Class::BelowOrEqual);

        let b = expected_values(5, 1, 1.0, 0.01).unwrap();
        assert!((b.e_s3t - 0.03808).abs() < 1e-15);
        assert!((b.e_s2 - 0.008).abs() < 1e-15);
        assert!((b.threshold.unwrap() - 4.76).abs() < 1e-12);
        assert_eq!(b.s3_class, S3Class::Above);
        assert_eq!(threshold_rule_class(5, 1, 1.0, 0.01), S3Class::Above);
    }

    #[test]
    fn expected_value_argument_errors() {
        assert!(expected_values(1, 0, 0.0, 1.0).is_err());
        assert!(expected_values(5, 5, 0.0, 1.0).is_err());
        assert!(expected_values(5, 1, 0.0, -1.0).is_err());
    }

    #[test]
    fn ordering_grid() {
        for n in 2..=50 {
            for k in 1..n {
                for mu in [-2.0, 0.0, 1.5] {
                    for s2 in [0.01, 1.0, 4.0] {
                        let b = expected_values(n, k, mu, s2).unwrap();
                        assert!(b.e_s1t > b.e_s2);
                        assert!(b.e_s2t < b.e_s2);
                        // The classification is exact; the float comparison needs
                        // slack at the boundary k(n-k)μ² = (n²-k)σ².
                        let below = b.e_s3t <= b.e_s2 + 1e-12 * b.e_s2;
                        match b.s3_class {
                            S3Class::Above => assert!(!below, "n={n} k={k} mu={mu} s2={s2}"),
                            _ => assert!(below, "n={n} k={k} mu={mu} s2={s2}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn threshold_rule_matches_exact_sign_when_one_item_deleted() {
        for n in 2..=50 {
            for mu in [-2.0, 0.0, 1.5] {
                for s2 in [0.01, 1.0, 4.0] {
                    let b = expected_values(n, 1, mu, s2).unwrap();
                    assert_eq!(b.s3_class, threshold_rule_class(n, 1, mu, s2));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn zero_deletion_reduces_to_classical(values in prop::collection::vec(-100.0f64..100.0, 1..50)) {
            let n = values.len();
            let r = EstimatorReport::compute(&values, &vec![false; n]);
            prop_assert_eq!(r.xtilde.to_bits(), r.xbar.to_bits());
            prop_assert_eq!(r.s1t.to_bits(), r.s2.to_bits());
            prop_assert_eq!(r.s2t.to_bits(), r.s2.to_bits());
            prop_assert_eq!(r.s3t.to_bits(), r.s2.to_bits());
        }

        #[test]
        fn partition_and_positivity(values in prop::collection::vec(-100.0f64..100.0, 2..50), seed: u64) {
            let n = values.len();
            let k = (seed as usize) % n;
            let idx = crate::deletion::select_indices(crate::deletion::DeletionPolicy::UniformRandom, k, &values, seed).unwrap();
            let f = SampleFrame::with_deleted_indices(values.clone(), &idx).unwrap();
            let r = f.report();
            let removed: f64 = idx.iter().map(|&i| values[i]).sum();
            prop_assert!((r.xbar - (r.xtilde + removed / n as f64)).abs() <= 1e-12 * (1.0 + r.xbar.abs() + removed.abs()));
            prop_assert!(r.s2 >= 0.0 && r.s1t >= 0.0 && r.s2t >= 0.0 && r.s3t >= 0.0);
            prop_assert!(f.expansion_residuals().within(1e-10));
        }
    }
}
