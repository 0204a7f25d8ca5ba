//! Command-line front end: `dslab <experiment> [--config PATH] [--seed U64]
//! [--workers N] [--out DIR] [overrides]`.
//!
//! Precedence is flag > config file > `DSLAB_SEED` (seed only).

pub mod config;
pub mod runner;

use std::path::{Path, PathBuf};

use clap::{Args, Parser};

pub use config::{validate, Experiment, ExperimentConfig, Finding, Severity, SCHEMA_VERSION};
pub use runner::{csv_header, run, Artifacts, RunError, EXIT_OK, EXIT_PRECONDITION, EXIT_VALIDATION};

use crate::deletion::{DeletionPlan, DeletionPolicy, DeletionSchedule};
use crate::error::Error;

pub const SEED_ENV: &str = "DSLAB_SEED";

#[derive(Debug, Parser)]
#[command(name = "dslab", version, about = "Deleting-items limit theorem laboratory")]
pub struct Cli {
    #[arg(value_enum)]
    pub experiment: Experiment,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed [fallback: DSLAB_SEED]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; never changes results.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Artifact directory [default: .]
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Distribution as inline JSON or a JSON file.
    #[arg(long)]
    pub distribution: Option<String>,
    /// Triangular array as inline JSON or a JSON file.
    #[arg(long)]
    pub array: Option<String>,
    /// Discrete law (`{"atoms": [[v, p], ...]}`) as inline JSON or a file.
    #[arg(long)]
    pub law: Option<String>,
    /// `zero`, `fixed:K`, `power:R`, `linear:C`, or schedule JSON.
    #[arg(long)]
    pub schedule: Option<String>,
    /// `prefix`, `uniform_random` or `extremal_abs`.
    #[arg(long)]
    pub policy: Option<String>,
    /// Tail radius (wlln, slln), Lindeberg ε (conditions) or log exponent (log-scaling).
    #[arg(long, allow_negative_numbers = true)]
    pub eps: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    pub eps_grid: Option<Vec<f64>>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_grid: Option<Vec<usize>>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Replications, or paths for slln and log-scaling.
    #[arg(long)]
    pub reps: Option<u64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub mu: Option<f64>,
    #[arg(long)]
    pub sigma2: Option<f64>,
}

fn json_or_file<T: serde::de::DeserializeOwned>(what: &str, arg: &str) -> Result<T, Error> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::InvalidArgument(format!("--{what} {arg}: {e}")))?
    };
    serde_json::from_str(&text).map_err(|e| Error::InvalidArgument(format!("--{what}: {e}")))
}

/// Parse `zero`, `fixed:K`, `power:R`, `linear:C` or schedule JSON.
pub fn parse_schedule(arg: &str) -> Result<DeletionSchedule, Error> {
    if arg.trim_start().starts_with('{') {
        return json_or_file("schedule", arg);
    }
    let (kind, value) = arg.split_once(':').unwrap_or((arg, ""));
    let bad = |v: &str| Error::InvalidArgument(format!("--schedule {kind}: cannot parse `{v}`"));
    let s = match kind {
        "zero" => DeletionSchedule::Zero,
        "fixed" => DeletionSchedule::Fixed { k: value.parse().map_err(|_| bad(value))? },
        "power" => DeletionSchedule::Power { r: value.parse().map_err(|_| bad(value))? },
        "linear" => DeletionSchedule::Linear { c: value.parse().map_err(|_| bad(value))? },
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown schedule `{other}`, expected one of `zero`, `fixed:K`, `power:R`, `linear:C`"
            )))
        }
    };
    s.validate()?;
    Ok(s)
}

pub fn parse_policy(arg: &str) -> Result<DeletionPolicy, Error> {
    serde_json::from_value(serde_json::Value::String(arg.to_string()))
        .map_err(|e| Error::InvalidArgument(format!("--policy: {e}")))
}

/// Merge config file, flags and environment into one config.
pub fn resolve(experiment: Experiment, opts: &Options, env_seed: Option<&str>) -> Result<ExperimentConfig, Error> {
    let mut cfg = match &opts.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::InvalidArgument(format!("--config {}: {e}", path.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            if cfg.experiment != experiment {
                return Err(Error::InvalidArgument(format!(
                    "config is for `{}`, not `{}`",
                    cfg.experiment.slug(),
                    experiment.slug()
                )));
            }
            cfg
        }
        None => ExperimentConfig::new(experiment),
    };
    if let Some(s) = opts.seed {
        cfg.master_seed = Some(s);
    } else if cfg.master_seed.is_none() {
        if let Some(v) = env_seed {
            let s = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("{SEED_ENV}=`{v}` is not an unsigned 64-bit integer")))?;
            cfg.master_seed = Some(s);
        }
    }
    if let Some(d) = &opts.distribution {
        cfg.distribution = Some(json_or_file("distribution", d)?);
    }
    if let Some(a) = &opts.array {
        cfg.array = Some(json_or_file("array", a)?);
    }
    if let Some(l) = &opts.law {
        cfg.law = Some(json_or_file("law", l)?);
    }
    if opts.schedule.is_some() || opts.policy.is_some() {
        let base = cfg.plan.unwrap_or_else(DeletionPlan::none);
        let schedule = opts.schedule.as_deref().map(parse_schedule).transpose()?.unwrap_or(base.schedule);
        let policy = opts.policy.as_deref().map(parse_policy).transpose()?.unwrap_or(base.policy);
        cfg.plan = Some(DeletionPlan::new(schedule, policy));
    }
    macro_rules! take {
        ($($f:ident),*) => { $( if opts.$f.is_some() { cfg.$f = opts.$f.clone(); } )* };
    }
    take!(eps, eps_grid, n_grid, n_max, reps, delta, n, k, mu, sigma2, out, workers);
    Ok(cfg)
}

/// Full CLI behaviour minus process exit; returns the exit status.
pub fn execute(cli: &Cli, env_seed: Option<&str>) -> i32 {
    let cfg = match resolve(cli.experiment, &cli.opts, env_seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return RunError::from(e).code;
        }
    };
    let artifacts = match run(&cfg) {
        Ok(a) => a,
        Err(e) => {
            for m in &e.messages {
                eprintln!("{m}");
            }
            return e.code;
        }
    };
    for w in &artifacts.warnings {
        eprintln!("{w}");
    }
    for line in &artifacts.summary {
        println!("{line}");
    }
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
    match artifacts.write(Path::new(&dir)) {
        Ok((csv, json)) => {
            println!("wrote {}", csv.display());
            println!("wrote {}", json.display());
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: writing artifacts to {}: {e}", dir.display());
            EXIT_VALIDATION
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shorthand() {
        assert_eq!(parse_schedule("zero").unwrap(), DeletionSchedule::Zero);
        assert_eq!(parse_schedule("fixed:5").unwrap(), DeletionSchedule::Fixed { k: 5 });
        assert_eq!(parse_schedule("power:0.5").unwrap(), DeletionSchedule::Power { r: 0.5 });
        assert_eq!(parse_schedule(r#"{"kind":"linear","c":0.5}"#).unwrap(), DeletionSchedule::Linear { c: 0.5 });
        assert!(parse_schedule("power:1.5").is_err());
        let msg = parse_schedule("geometric:2").unwrap_err().to_string();
        assert!(msg.contains("power:R"));
        let msg = parse_policy("largest").unwrap_err().to_string();
        assert!(msg.contains("extremal_abs"), "{msg}");
    }

    #[test]
    fn seed_precedence() {
        let mut opts = Options::default();
        let c = resolve(Experiment::Wlln, &opts, Some("7")).unwrap();
        assert_eq!(c.master_seed, Some(7));
        opts.seed = Some(9);
        assert_eq!(resolve(Experiment::Wlln, &opts, Some("7")).unwrap().master_seed, Some(9));
        opts.seed = None;
        assert!(resolve(Experiment::Wlln, &opts, Some("x")).is_err());
        assert_eq!(resolve(Experiment::Wlln, &opts, None).unwrap().master_seed, None);
    }

    #[test]
    fn flags_override_config() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"schema_version":1,"experiment":"wlln","master_seed":3,"eps":0.2,"reps":100}"#).unwrap();
        let opts = Options { config: Some(path.clone()), eps: Some(0.05), ..Options::default() };
        let c = resolve(Experiment::Wlln, &opts, Some("11")).unwrap();
        assert_eq!(c.eps, Some(0.05));
        assert_eq!(c.reps, Some(100));
        assert_eq!(c.master_seed, Some(3));
        let opts = Options { config: Some(path), ..Options::default() };
        assert!(resolve(Experiment::Clt, &opts, None).is_err());
    }
}
