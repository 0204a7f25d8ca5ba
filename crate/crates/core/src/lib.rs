//! Deleting-items limit theorems: estimators, closed-form bias, classical
//! CLT conditions, a seeded Monte Carlo laboratory and an exact oracle for
//! small discrete laws.

// `!(x > 0.0)` is used deliberately so NaN is rejected with the bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Experiment entry points take their full parameter list explicitly.
#![allow(clippy::too_many_arguments)]

pub mod cli;
pub mod conditions;
pub mod deletion;
pub mod dist;
pub mod error;
pub mod estimators;
pub mod mc;
pub mod oracle;
pub mod rng;
pub mod special;

pub use deletion::{DeletionPlan, DeletionPolicy, DeletionSchedule, NegligibilityClass};
pub use dist::{DistributionSpec, TriangularArraySpec};
pub use error::{Error, Result};
pub use estimators::{expected_values, BiasReport, EstimatorReport, SampleFrame};
pub use mc::Execution;
pub use oracle::{enumerate_expectations, exact_tail_prob, DiscreteLaw};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
