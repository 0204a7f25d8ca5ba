//! Monte Carlo laboratory: experiments, curves and the replication executor.

pub mod curve;
pub mod exec;
pub mod experiments;
pub mod ks;
mod paths;

pub use curve::{ConvergenceCurve, Diagnostic, ExperimentMeta};
pub use exec::Execution;
pub use experiments::{
    bounded_functional, clt_curve, clt_experiment, decade_grid, log_scaling_experiment, retained_sums, slln_proxy,
    wlln_experiment, CltResult, SampleSource,
};
pub use ks::{ks_statistic, ks_two_sample};
