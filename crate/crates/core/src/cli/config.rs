//! Experiment configuration and its validation rules.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::deletion::{DeletionPlan, DeletionPolicy, NegligibilityClass};
use crate::dist::{DistributionSpec, TriangularArraySpec};
use crate::error::Error;
use crate::mc::SampleSource;
use crate::oracle::DiscreteLaw;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    Wlln,
    Slln,
    Clt,
    LogScaling,
    Bias,
    Oracle,
    Conditions,
}

impl Experiment {
    /// File-name stem, also the CLI subcommand.
    pub fn slug(&self) -> &'static str {
        match self {
            Self::Wlln => "wlln",
            Self::Slln => "slln",
            Self::Clt => "clt",
            Self::LogScaling => "log-scaling",
            Self::Bias => "bias",
            Self::Oracle => "oracle",
            Self::Conditions => "conditions",
        }
    }

    /// Experiments that draw random numbers and so need a seed.
    pub fn is_stochastic(&self) -> bool {
        matches!(self, Self::Wlln | Self::Slln | Self::Clt | Self::LogScaling)
    }
}

/// A complete, reproducible description of one run. `workers` and `out`
/// affect where and how fast a run happens, not what it computes, and are
/// excluded from the canonical form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distribution: Option<DistributionSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub array: Option<TriangularArraySpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<DiscreteLaw>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<DeletionPlan>,
    /// Tail radius for wlln/slln, Lindeberg ε for conditions, exponent for log_scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    /// Replications, or paths for slln and log_scaling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            experiment,
            master_seed: None,
            distribution: None,
            array: None,
            law: None,
            plan: None,
            eps: None,
            eps_grid: None,
            n_grid: None,
            n_max: None,
            reps: None,
            delta: None,
            n: None,
            k: None,
            mu: None,
            sigma2: None,
            out: None,
            workers: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("config: {e}")))
    }

    /// The config without run-location fields.
    pub fn canonical(&self) -> Self {
        Self { out: None, workers: None, ..self.clone() }
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string(&self.canonical()).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }

    pub fn plan_or_default(&self) -> DeletionPlan {
        self.plan.unwrap_or_else(DeletionPlan::none)
    }

    /// The summand source, when exactly one of `distribution`/`array` is set.
    pub fn source(&self) -> Option<SampleSource> {
        match (&self.distribution, &self.array) {
            (Some(d), None) => Some(SampleSource::Iid(d.clone())),
            (None, Some(a)) => Some(SampleSource::Array(a.clone())),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Precondition,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Warning => "warning",
            Severity::Precondition => "precondition",
            Severity::Error => "error",
        };
        write!(f, "{tag}: {}", self.message)
    }
}

struct Findings(Vec<Finding>);

impl Findings {
    fn error(&mut self, m: impl Into<String>) {
        self.0.push(Finding { severity: Severity::Error, message: m.into() });
    }
    fn precondition(&mut self, m: impl Into<String>) {
        self.0.push(Finding { severity: Severity::Precondition, message: m.into() });
    }
    fn warning(&mut self, m: impl Into<String>) {
        self.0.push(Finding { severity: Severity::Warning, message: m.into() });
    }
    fn push_error(&mut self, e: Error) {
        if e.is_precondition() {
            self.precondition(e.to_string())
        } else {
            self.error(e.to_string())
        }
    }
}

/// The law the moment rules look at: the i.i.d. law, or row 1 of an array.
fn lead_law(cfg: &ExperimentConfig) -> Option<DistributionSpec> {
    match (&cfg.distribution, &cfg.array) {
        (Some(d), _) => Some(d.clone()),
        (None, Some(a)) => Some(a.row(1)),
        _ => None,
    }
}

/// Schema and cross-field checks. Never fails; problems come back as findings,
/// most severe first.
pub fn validate(cfg: &ExperimentConfig) -> Vec<Finding> {
    let mut f = Findings(Vec::new());
    if cfg.schema_version != SCHEMA_VERSION {
        f.error(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", cfg.schema_version));
    }
    let exp = cfg.experiment;
    if exp.is_stochastic() && cfg.master_seed.is_none() {
        f.error("master_seed is required (config, --seed, or DSLAB_SEED)");
    }
    if cfg.workers == Some(0) {
        f.error("workers must be at least 1");
    }
    let plan = cfg.plan_or_default();
    if let Err(e) = plan.schedule.validate() {
        f.push_error(e);
    }

    let needs_source = matches!(exp, Experiment::Wlln | Experiment::Slln | Experiment::Clt | Experiment::LogScaling | Experiment::Conditions);
    if needs_source {
        match (&cfg.distribution, &cfg.array) {
            (Some(_), Some(_)) => f.error("give either distribution or array, not both"),
            (None, None) => f.error(format!("{} needs a distribution or an array", exp.slug())),
            (Some(d), None) => {
                if let Err(e) = d.validate() {
                    f.push_error(e)
                }
            }
            (None, Some(a)) => {
                if let Err(e) = a.validate() {
                    f.push_error(e)
                }
            }
        }
        if matches!(exp, Experiment::Slln | Experiment::LogScaling) && cfg.array.is_some() {
            f.error(format!("{} runs on i.i.d. laws only", exp.slug()));
        }
    }

    let need = |f: &mut Findings, present: bool, name: &str| {
        if !present {
            f.error(format!("{} needs `{name}`", exp.slug()));
        }
    };
    let positive_grid = |f: &mut Findings, grid: &Option<Vec<usize>>| {
        if let Some(g) = grid {
            if g.is_empty() || g.contains(&0) {
                f.error("n_grid must be non-empty with entries >= 1");
            }
        }
    };

    match exp {
        Experiment::Wlln | Experiment::Slln | Experiment::LogScaling => {
            need(&mut f, cfg.eps.is_some(), "eps");
            need(&mut f, cfg.n_grid.is_some(), "n_grid");
            need(&mut f, cfg.reps.is_some(), "reps");
            positive_grid(&mut f, &cfg.n_grid);
            if matches!(cfg.eps, Some(e) if !(e > 0.0)) {
                f.error("eps must be positive");
            }
        }
        Experiment::Clt => {
            need(&mut f, cfg.n_grid.is_some() || cfg.n.is_some(), "n_grid");
            need(&mut f, cfg.reps.is_some(), "reps");
            positive_grid(&mut f, &cfg.n_grid);
        }
        Experiment::Conditions => {
            need(&mut f, cfg.n_grid.is_some() || cfg.n.is_some(), "n_grid");
            positive_grid(&mut f, &cfg.n_grid);
            if let Some(g) = &cfg.eps_grid {
                if g.is_empty() || g.iter().any(|e| !(*e > 0.0)) {
                    f.error("eps_grid entries must be positive");
                }
            }
            if matches!(cfg.delta, Some(d) if !(d > 0.0)) {
                f.error("delta must be positive");
            }
        }
        Experiment::Bias => {
            need(&mut f, cfg.n.is_some(), "n");
            need(&mut f, cfg.k.is_some() || cfg.plan.is_some(), "k");
            let moments = cfg.mu.is_some() && cfg.sigma2.is_some();
            if !moments && cfg.distribution.is_none() {
                f.error("bias needs `mu` and `sigma2`, or a distribution");
            }
            if let (Some(d), false) = (&cfg.distribution, moments) {
                if let Err(e) = d.require_variance() {
                    f.push_error(e);
                }
            }
        }
        Experiment::Oracle => {
            need(&mut f, cfg.law.is_some(), "law");
            need(&mut f, cfg.n.is_some(), "n");
            if let Some(law) = &cfg.law {
                if let Err(e) = law.validate() {
                    f.push_error(e);
                }
            }
            if plan.policy == DeletionPolicy::ExtremalAbs {
                f.error("oracle supports prefix and uniform_random policies only");
            }
        }
    }

    if let (Some(n), Some(k)) = (cfg.n, cfg.k) {
        if k >= n {
            f.push_error(Error::DeletionTooLarge { k, n });
        }
    }

    // Moment preconditions and the negligibility rule table.
    if let Some(law) = lead_law(cfg) {
        let mean_needed = matches!(exp, Experiment::Wlln | Experiment::Slln | Experiment::LogScaling);
        let var_needed = matches!(exp, Experiment::Clt | Experiment::LogScaling | Experiment::Conditions);
        if mean_needed && cfg.array.is_none() {
            if let Err(e) = law.require_mean() {
                f.push_error(e);
            }
        }
        if var_needed && cfg.array.is_none() {
            if let Err(e) = law.require_variance() {
                f.push_error(e);
            }
        }
        if exp == Experiment::LogScaling && law.has_finite_mean() && law.mean() != 0.0 {
            f.error(format!("log_scaling needs a zero-mean law; {} has mean {}", law.name(), law.mean()));
        }
        let class = plan.schedule.negligibility_class();
        let mean = law.mean();
        match exp {
            Experiment::Wlln | Experiment::Slln if class == NegligibilityClass::Violating => f.warning(format!(
                "schedule {} violates k*/n -> 0 — negative-control run",
                plan.schedule.label()
            )),
            Experiment::Clt => {
                let violates = match class {
                    NegligibilityClass::Violating => true,
                    NegligibilityClass::LlnOnly => mean.is_finite() && mean != 0.0,
                    NegligibilityClass::LlnAndClt => false,
                };
                if violates {
                    f.warning(format!(
                        "schedule {} violates k*/sqrt(n) -> 0 — negative-control run",
                        plan.schedule.label()
                    ));
                }
            }
            _ => {}
        }
    }
    let mut out = f.0;
    out.sort_by_key(|f| std::cmp::Reverse(f.severity));
    out
}
