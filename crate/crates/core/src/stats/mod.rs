//! Hypothesis tests, correlation tests and classification metrics.

pub mod bootstrap;
pub mod hypothesis;
pub mod metrics;
pub mod special;

pub use bootstrap::{bootstrap_se, metrics_report, DEFAULT_RESAMPLES};
pub use hypothesis::{
    average_ranks, mean, paired_t_test, pearson, sample_sd, spearman, standard_error,
    CorrelationResult, PairedSamples, TestResult,
};
pub use metrics::{
    auprc, auroc, confusion_metrics, select_threshold, ConfusionCounts, ConfusionMetrics,
    Estimate, Metric, MetricsReport, ThresholdCriterion, ThresholdReport,
};
pub use special::{incomplete_beta, ln_gamma, t_sf};
