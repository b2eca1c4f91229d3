//! Experiment orchestration: configs, the named experiments, statistics
//! and reports. Trials run in parallel, each on a stream derived from
//! (seed, sub-experiment, trial index), so results do not depend on the
//! thread count.

pub mod config;
pub mod experiments;
pub mod report;
pub mod stats;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::{bench, observable, run_acceptance, run_experiment, trial_rng, yes_instance};
pub use report::{Metric, Report, Tolerance};
pub use stats::{binomial_ci, chi2_gof, chi2_test, tv_distance, Chi2, Histogram};
