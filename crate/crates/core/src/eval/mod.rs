//! Metrics, the analytic Bayes reference for the Gaussian task, and the
//! replicated experiment runner.

mod experiment;
mod metrics;

pub use experiment::{
    run_experiment, DataSource, ExperimentPlan, ExperimentReport, Method, MetricSummary, RepResult, Summary,
};
pub use metrics::{accuracy, auc, bayes_accuracy_gaussian, normal_cdf, welch_t};
