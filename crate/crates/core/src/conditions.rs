//! Numerical evaluation of the CLT hypotheses on a triangular array:
//! Lindeberg and Lyapunov sums, the Feller ratio, and the two rate sequences
//! `n max σ_i² / B_n²` and `√n max |μ_i| / B_n`.
//!
//! The rate conditions are `O(·)` statements. The tool only reports the
//! normalized sequences over a finite grid ("finite-grid evidence"); it never
//! decides boundedness. In the i.i.d. case both rates are constant, so they
//! hold trivially and are redundant with the other hypotheses.

use serde::{Deserialize, Serialize};

use crate::dist::TriangularArraySpec;
use crate::error::{Error, Result};

/// Default Lindeberg ε grid.
pub const DEFAULT_EPS_GRID: [f64; 3] = [0.01, 0.1, 0.5];

/// One row of the conditions table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub n: usize,
    pub lindeberg: f64,
    pub lyapunov: Option<f64>,
    pub feller_max: f64,
    pub rate_sigma: f64,
    pub rate_mu: f64,
    pub b_n2: f64,
}

impl ConditionReport {
    pub const CSV_HEADER: &'static str = "n,lindeberg,lyapunov,feller_max,rate_sigma,rate_mu,b_n2";

    pub fn csv_row(&self) -> String {
        let lyap = self.lyapunov.map(|v| v.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{}",
            self.n, self.lindeberg, lyap, self.feller_max, self.rate_sigma, self.rate_mu, self.b_n2
        )
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::InvalidArgument("n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `(1/B_n²) Σ_{i ≤ n} E[(ξ_i - μ_i)² 1{|ξ_i - μ_i| > ε B_n}]`.
pub fn lindeberg_sum(array: &TriangularArraySpec, n: usize, eps: f64) -> Result<f64> {
    check_n(n)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("eps must be positive, got {eps}")));
    }
    let b_n2 = array.b_n2(n);
    let t = eps * b_n2.sqrt();
    let total = match array.as_iid() {
        Some(law) => n as f64 * law.truncated_second_moment(t)?,
        None => {
            let mut s = 0.0;
            for i in 1..=n {
                s += array.row(i).truncated_second_moment(t)?;
            }
            s
        }
    };
    Ok(total / b_n2)
}

/// `(1/B_n^{2+δ}) Σ_{i ≤ n} E|ξ_i - μ_i|^{2+δ}`.
pub fn lyapunov_sum(array: &TriangularArraySpec, n: usize, delta: f64) -> Result<f64> {
    check_n(n)?;
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("delta must be positive, got {delta}")));
    }
    let order = 2.0 + delta;
    let b_n2 = array.b_n2(n);
    let total = match array.as_iid() {
        Some(law) => n as f64 * law.abs_central_moment(order)?,
        None => {
            let mut s = 0.0;
            for i in 1..=n {
                s += array.row(i).abs_central_moment(order)?;
            }
            s
        }
    };
    Ok(total / b_n2.powf(1.0 + 0.5 * delta))
}

/// Feller ratio and rate sequences, with Lindeberg at `eps` and Lyapunov at
/// `delta` (`None` when that moment diverges).
pub fn condition_report(array: &TriangularArraySpec, n: usize, eps: f64, delta: f64) -> Result<ConditionReport> {
    check_n(n)?;
    let b_n2 = array.b_n2(n);
    let (max_var, max_abs_mu) = match array.as_iid() {
        Some(law) => (law.variance(), law.mean().abs()),
        None => (1..=n).map(|i| array.row(i)).fold((0.0f64, 0.0f64), |(v, m), row| {
            (v.max(row.variance()), m.max(row.mean().abs()))
        }),
    };
    let feller_max = max_var / b_n2;
    let lyapunov = match lyapunov_sum(array, n, delta) {
        Ok(v) => Some(v),
        Err(e) if e.is_precondition() => None,
        Err(e) => return Err(e),
    };
    Ok(ConditionReport {
        n,
        lindeberg: lindeberg_sum(array, n, eps)?,
        lyapunov,
        feller_max,
        rate_sigma: n as f64 * feller_max,
        rate_mu: (n as f64).sqrt() * max_abs_mu / b_n2.sqrt(),
        b_n2,
    })
}

/// [`condition_report`] with `ε = 0.1` and `δ = 1`.
pub fn feller_and_rates(array: &TriangularArraySpec, n: usize) -> Result<ConditionReport> {
    condition_report(array, n, 0.1, 1.0)
}

/// Largest value of each rate sequence over a grid. These are the figures to
/// inspect for boundedness; they are evidence over the grid only.
pub fn rate_envelope(reports: &[ConditionReport]) -> (f64, f64) {
    reports.iter().fold((0.0f64, 0.0f64), |(s, m), r| (s.max(r.rate_sigma), m.max(r.rate_mu)))
}
