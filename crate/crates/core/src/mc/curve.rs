use serde::{Deserialize, Serialize};

use crate::deletion::DeletionPlan;

/// Which convergence diagnostic a curve carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Diagnostic {
    /// `P(|X̃ - target| ≥ ε)`.
    TailProb,
    /// `E[D² / (1 + D²)]`, `D = X̃ - target`.
    BoundedFunctional,
    /// Fraction of paths whose deviation stays below ε from `n` to the horizon.
    PathProxy,
    KsDistance,
    /// `E|S̃| / (√n (ln n)^{1/2 + ε})`.
    LogScaled,
    StatMean,
}

/// Descriptor of the run that produced a curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentMeta {
    pub experiment: String,
    pub source: String,
    pub plan: DeletionPlan,
    pub master_seed: u64,
    /// Replications or paths per grid point.
    pub replications: u64,
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Monte Carlo estimates of a diagnostic over a grid of sample sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub n_grid: Vec<usize>,
    pub estimate: Vec<f64>,
    pub std_error: Vec<f64>,
    pub diagnostic: Diagnostic,
    pub metadata: ExperimentMeta,
}

impl ConvergenceCurve {
    pub const CSV_HEADER: &'static str = "n,estimate,std_error";

    pub fn len(&self) -> usize {
        self.n_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n_grid.is_empty()
    }

    /// Estimate at grid point `n`, if present.
    pub fn at(&self, n: usize) -> Option<(f64, f64)> {
        self.n_grid.iter().position(|&m| m == n).map(|i| (self.estimate[i], self.std_error[i]))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for i in 0..self.len() {
            out.push_str(&format!("{},{},{}\n", self.n_grid[i], self.estimate[i], self.std_error[i]));
        }
        out
    }

    /// Successive estimates never rise by more than `k` combined standard
    /// errors: `e[i+1] - e[i] <= k sqrt(se[i]² + se[i+1]²)`.
    pub fn non_increasing_within(&self, k: f64) -> bool {
        (1..self.len()).all(|i| {
            let slack = k * (self.std_error[i - 1].powi(2) + self.std_error[i].powi(2)).sqrt();
            self.estimate[i] - self.estimate[i - 1] <= slack
        })
    }

    /// Strictly decreasing estimates.
    pub fn strictly_decreasing(&self) -> bool {
        self.estimate.windows(2).all(|w| w[1] < w[0])
    }
}
