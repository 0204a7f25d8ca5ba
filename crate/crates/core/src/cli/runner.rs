//! Execute a validated config and render its CSV/JSON artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::config::{validate, Experiment, ExperimentConfig, Finding, Severity};
use crate::conditions::{condition_report, ConditionReport, DEFAULT_EPS_GRID};
use crate::deletion::{DeletionPlan, DeletionSchedule};
use crate::dist::TriangularArraySpec;
use crate::error::Error;
use crate::estimators::expected_values;
use crate::mc::experiments::CltResult;
use crate::mc::{clt_curve, log_scaling_experiment, slln_proxy, wlln_experiment, ConvergenceCurve, Execution, SampleSource};
use crate::oracle::{enumerate_expectations, exact_tail_prob};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

pub const CLT_CSV_HEADER: &str = "n,k,reps,ks,stat_mean,stat_var";
pub const BIAS_CSV_HEADER: &str = "n,k,mu,sigma2,e_xtilde,e_s1t,e_s2t,e_s3t,e_s2,s3_class,threshold";
pub const ORACLE_CSV_HEADER: &str = "quantity,exact,closed_form,rel_diff";

/// Column header of the CSV artifact for each experiment.
pub fn csv_header(exp: Experiment) -> String {
    match exp {
        Experiment::Wlln | Experiment::Slln | Experiment::LogScaling => ConvergenceCurve::CSV_HEADER.into(),
        Experiment::Clt => CLT_CSV_HEADER.into(),
        Experiment::Bias => BIAS_CSV_HEADER.into(),
        Experiment::Oracle => ORACLE_CSV_HEADER.into(),
        Experiment::Conditions => format!("eps,{}", ConditionReport::CSV_HEADER),
    }
}

/// A failed run with its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError {
    pub code: i32,
    pub messages: Vec<String>,
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        let code = if e.is_precondition() { EXIT_PRECONDITION } else { EXIT_VALIDATION };
        Self { code, messages: vec![e.to_string()] }
    }
}

/// Rendered outputs of a successful run.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    /// `<experiment>-<hash prefix>`.
    pub stem: String,
    pub csv: String,
    pub json: String,
    /// Human-readable lines for stdout.
    pub summary: Vec<String>,
    pub warnings: Vec<Finding>,
}

impl Artifacts {
    /// Write `<dir>/<stem>.csv` and `<dir>/<stem>.json`.
    pub fn write(&self, dir: &Path) -> std::io::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv = dir.join(format!("{}.csv", self.stem));
        let json = dir.join(format!("{}.json", self.stem));
        fs::write(&csv, &self.csv)?;
        fs::write(&json, &self.json)?;
        Ok((csv, json))
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn n_list(cfg: &ExperimentConfig) -> Vec<usize> {
    cfg.n_grid.clone().or_else(|| cfg.n.map(|n| vec![n])).unwrap_or_default()
}

struct Output {
    csv_rows: Vec<String>,
    result: Value,
    summary: Vec<String>,
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result serializes")
}

fn curve_output(curve: ConvergenceCurve) -> Output {
    let summary = (0..curve.len())
        .map(|i| format!("n = {}: {} (se {})", curve.n_grid[i], curve.estimate[i], curve.std_error[i]))
        .collect();
    let csv_rows = curve.to_csv().lines().skip(1).map(String::from).collect();
    Output { csv_rows, result: to_value(&curve), summary }
}

fn compute(cfg: &ExperimentConfig, exec: &Execution) -> Result<Output, Error> {
    let plan = cfg.plan_or_default();
    let seed = cfg.master_seed.unwrap_or(0);
    let missing = |what: &str| Error::InvalidArgument(format!("missing `{what}`"));
    match cfg.experiment {
        Experiment::Wlln => {
            let source = cfg.source().ok_or_else(|| missing("distribution"))?;
            let curve = wlln_experiment(
                &source,
                &plan,
                cfg.eps.ok_or_else(|| missing("eps"))?,
                cfg.n_grid.as_deref().ok_or_else(|| missing("n_grid"))?,
                cfg.reps.ok_or_else(|| missing("reps"))?,
                seed,
                exec,
            )?;
            Ok(curve_output(curve))
        }
        Experiment::Slln => {
            let dist = cfg.distribution.as_ref().ok_or_else(|| missing("distribution"))?;
            let grid = cfg.n_grid.as_deref().ok_or_else(|| missing("n_grid"))?;
            let n_max = cfg.n_max.unwrap_or_else(|| grid.iter().copied().max().unwrap_or(1));
            let curve = slln_proxy(
                dist,
                &plan,
                cfg.eps.ok_or_else(|| missing("eps"))?,
                grid,
                n_max,
                cfg.reps.ok_or_else(|| missing("reps"))?,
                seed,
                exec,
            )?;
            Ok(curve_output(curve))
        }
        Experiment::LogScaling => {
            let dist = cfg.distribution.as_ref().ok_or_else(|| missing("distribution"))?;
            let curve = log_scaling_experiment(
                dist,
                &plan,
                cfg.eps.ok_or_else(|| missing("eps"))?,
                cfg.n_grid.as_deref().ok_or_else(|| missing("n_grid"))?,
                cfg.reps.ok_or_else(|| missing("reps"))?,
                seed,
                exec,
            )?;
            Ok(curve_output(curve))
        }
        Experiment::Clt => {
            let source = cfg.source().ok_or_else(|| missing("distribution"))?;
            let grid = n_list(cfg);
            let (curve, results) = clt_curve(&source, &plan, &grid, cfg.reps.ok_or_else(|| missing("reps"))?, seed, exec)?;
            let row = |r: &CltResult| format!("{},{},{},{},{},{}", r.n, r.k, r.reps, r.ks, r.stat_mean, r.stat_var);
            Ok(Output {
                csv_rows: results.iter().map(row).collect(),
                summary: results
                    .iter()
                    .map(|r| format!("n = {}, k = {}: ks = {}, stat_mean = {}, stat_var = {}", r.n, r.k, r.ks, r.stat_mean, r.stat_var))
                    .collect(),
                result: json!({ "curve": curve, "results": results }),
            })
        }
        Experiment::Bias => {
            let n = cfg.n.ok_or_else(|| missing("n"))?;
            let k = cfg.k.unwrap_or_else(|| plan.k_of_n(n));
            let (mu, sigma2) = match (cfg.mu, cfg.sigma2, &cfg.distribution) {
                (Some(m), Some(s), _) => (m, s),
                (_, _, Some(d)) => (d.require_mean()?, d.require_variance()?),
                _ => return Err(missing("mu and sigma2")),
            };
            let r = expected_values(n, k, mu, sigma2)?;
            let class = serde_json::to_value(r.s3_class).expect("serializes");
            let class = class.as_str().unwrap_or_default().to_string();
            Ok(Output {
                csv_rows: vec![format!(
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.n, r.k, r.mu, r.sigma2, r.e_xtilde, r.e_s1t, r.e_s2t, r.e_s3t, r.e_s2, class, fmt_opt(r.threshold)
                )],
                summary: vec![
                    format!("E[X~]   = {}", r.e_xtilde),
                    format!("E[S~1^2] = {}", r.e_s1t),
                    format!("E[S~2^2] = {}", r.e_s2t),
                    format!("E[S~3^2] = {}", r.e_s3t),
                    format!("E[S^2]   = {}", r.e_s2),
                    format!("S~3^2 vs S^2: {class}"),
                ],
                result: to_value(&r),
            })
        }
        Experiment::Oracle => {
            let law = cfg.law.as_ref().ok_or_else(|| missing("law"))?;
            let n = cfg.n.ok_or_else(|| missing("n"))?;
            let plan = match cfg.k {
                Some(k) => DeletionPlan::new(DeletionSchedule::Fixed { k }, plan.policy),
                None => plan,
            };
            let exact = enumerate_expectations(law, n, &plan)?;
            let closed = if n >= 2 { Some(expected_values(n, exact.k, law.mean(), law.variance())?) } else { None };
            let names = ["xbar", "s2", "xtilde", "s1t", "s2t", "s3t"];
            let cf = closed.map(|c| [law.mean(), c.e_s2, c.e_xtilde, c.e_s1t, c.e_s2t, c.e_s3t]);
            let mut rows = Vec::new();
            let mut summary = vec![format!("{} outcomes, k = {}", exact.outcomes, exact.k)];
            let mut max_rel = 0.0f64;
            for (i, name) in names.iter().enumerate() {
                let e = exact.as_array()[i];
                let c = cf.map(|c| c[i]);
                let rel = c.map(|c| if e == c { 0.0 } else { (e - c).abs() / c.abs().max(e.abs()) });
                max_rel = max_rel.max(rel.unwrap_or(0.0));
                rows.push(format!("{name},{e},{},{}", fmt_opt(c), fmt_opt(rel)));
                summary.push(format!("E[{name}] = {e}"));
            }
            let tail = match cfg.eps {
                Some(eps) => {
                    let p = exact_tail_prob(law, n, &plan, eps)?;
                    rows.push(format!("tail_prob,{p},,"));
                    summary.push(format!("P(|X~ - mean| >= {eps}) = {p}"));
                    Some(p)
                }
                None => None,
            };
            summary.push(format!("max relative difference to closed forms: {max_rel}"));
            Ok(Output {
                csv_rows: rows,
                summary,
                result: json!({ "exact": exact, "closed_form": closed, "max_rel_diff": max_rel, "tail_prob": tail }),
            })
        }
        Experiment::Conditions => {
            let array = match cfg.source().ok_or_else(|| missing("distribution"))? {
                SampleSource::Iid(d) => TriangularArraySpec::iid(d),
                SampleSource::Array(a) => a,
            };
            array.validate()?;
            let eps_grid = cfg.eps_grid.clone().or_else(|| cfg.eps.map(|e| vec![e])).unwrap_or(DEFAULT_EPS_GRID.to_vec());
            let delta = cfg.delta.unwrap_or(1.0);
            let mut rows = Vec::new();
            let mut reports = Vec::new();
            for &eps in &eps_grid {
                for &n in &n_list(cfg) {
                    let r = condition_report(&array, n, eps, delta)?;
                    rows.push(format!("{eps},{}", r.csv_row()));
                    reports.push(json!({ "eps": eps, "report": r }));
                }
            }
            Ok(Output {
                summary: rows.clone(),
                csv_rows: rows,
                result: json!({ "delta": delta, "rows": reports }),
            })
        }
    }
}

/// Validate and run. Warnings are carried into the artifacts; errors and
/// precondition findings abort with exit status 2 or 3.
pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts, RunError> {
    let findings = validate(cfg);
    let worst = findings.iter().map(|f| f.severity).max();
    if matches!(worst, Some(Severity::Error) | Some(Severity::Precondition)) {
        let code = if worst == Some(Severity::Error) { EXIT_VALIDATION } else { EXIT_PRECONDITION };
        return Err(RunError {
            code,
            messages: findings.iter().filter(|f| f.severity != Severity::Warning).map(|f| f.to_string()).collect(),
        });
    }
    let exec = match cfg.workers {
        Some(w) => Execution::with_workers(w),
        None => Execution::parallel(),
    };
    let out = compute(cfg, &exec)?;
    let hash = cfg.hash();
    let header = csv_header(cfg.experiment);
    let mut csv = header.clone();
    csv.push('\n');
    for r in &out.csv_rows {
        csv.push_str(r);
        csv.push('\n');
    }
    let warnings: Vec<Finding> = findings;
    let doc = json!({
        "experiment": cfg.experiment,
        "config_hash": hash,
        "master_seed": cfg.master_seed,
        "library_version": crate::VERSION,
        "config": cfg.canonical(),
        "csv_header": header,
        "warnings": warnings.iter().map(|w| w.message.clone()).collect::<Vec<_>>(),
        "result": out.result,
    });
    let mut json = serde_json::to_string_pretty(&doc).expect("artifact serializes");
    json.push('\n');
    Ok(Artifacts {
        stem: format!("{}-{}", cfg.experiment.slug(), &hash[..16]),
        csv,
        json,
        summary: out.summary,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deletion::DeletionPolicy;
    use crate::dist::DistributionSpec;
    use crate::oracle::DiscreteLaw;

    #[test]
    fn pinned_headers() {
        assert_eq!(csv_header(Experiment::Wlln), "n,estimate,std_error");
        assert_eq!(csv_header(Experiment::Slln), "n,estimate,std_error");
        assert_eq!(csv_header(Experiment::LogScaling), "n,estimate,std_error");
        assert_eq!(csv_header(Experiment::Clt), "n,k,reps,ks,stat_mean,stat_var");
        assert_eq!(csv_header(Experiment::Bias), "n,k,mu,sigma2,e_xtilde,e_s1t,e_s2t,e_s3t,e_s2,s3_class,threshold");
        assert_eq!(csv_header(Experiment::Oracle), "quantity,exact,closed_form,rel_diff");
        assert_eq!(csv_header(Experiment::Conditions), "eps,n,lindeberg,lyapunov,feller_max,rate_sigma,rate_mu,b_n2");
    }

    #[test]
    fn bias_run() {
        let cfg = ExperimentConfig { n: Some(10), k: Some(2), mu: Some(0.0), sigma2: Some(1.0), ..ExperimentConfig::new(Experiment::Bias) };
        let a = run(&cfg).unwrap();
        let row: Vec<&str> = a.csv.lines().nth(1).unwrap().split(',').collect();
        let x: Vec<f64> = row[4..9].iter().map(|s| s.parse().unwrap()).collect();
        for (got, want) in x.iter().zip([0.0, 0.92, 0.72, 0.704, 0.9]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(row[9], "mu_zero_below");
        assert!(a.stem.starts_with("bias-"));
    }

    #[test]
    fn oracle_run_matches_closed_forms() {
        let cfg = ExperimentConfig {
            law: Some(DiscreteLaw::new(vec![(0.0, 0.5), (1.0, 0.5)]).unwrap()),
            n: Some(4),
            k: Some(1),
            ..ExperimentConfig::new(Experiment::Oracle)
        };
        let a = run(&cfg).unwrap();
        let doc: Value = serde_json::from_str(&a.json).unwrap();
        assert!(doc["result"]["max_rel_diff"].as_f64().unwrap() <= 1e-12);
        assert_eq!(doc["result"]["exact"]["e_s3t"].as_f64().unwrap(), 0.140625);
    }

    #[test]
    fn exit_codes() {
        let mut cfg = ExperimentConfig::new(Experiment::Clt);
        cfg.distribution = Some(DistributionSpec::pareto(1.5).unwrap());
        cfg.n_grid = Some(vec![100]);
        cfg.reps = Some(1000);
        assert_eq!(run(&cfg).unwrap_err().code, EXIT_VALIDATION); // no seed
        cfg.master_seed = Some(1);
        let e = run(&cfg).unwrap_err();
        assert_eq!(e.code, EXIT_PRECONDITION);
        assert!(e.messages[0].contains("infinite variance"));
    }

    #[test]
    fn artifacts_embed_provenance_and_are_worker_invariant() {
        let cfg = ExperimentConfig {
            master_seed: Some(42),
            distribution: Some(DistributionSpec::normal(2.0, 1.0).unwrap()),
            plan: Some(DeletionPlan::new(DeletionSchedule::Power { r: 0.25 }, DeletionPolicy::UniformRandom)),
            n_grid: Some(vec![50, 200]),
            reps: Some(1000),
            ..ExperimentConfig::new(Experiment::Clt)
        };
        let a = run(&ExperimentConfig { workers: Some(1), ..cfg.clone() }).unwrap();
        let b = run(&ExperimentConfig { workers: Some(3), ..cfg.clone() }).unwrap();
        assert_eq!(a, b);
        let doc: Value = serde_json::from_str(&a.json).unwrap();
        assert_eq!(doc["config_hash"], cfg.hash());
        assert_eq!(doc["master_seed"], 42);
        assert_eq!(doc["library_version"], crate::VERSION);
        assert!(doc["config"].get("workers").is_none());
        let back: ExperimentConfig = serde_json::from_value(doc["config"].clone()).unwrap();
        assert_eq!(run(&back).unwrap().json, a.json);
    }
}
