//! Metrics, cohort aggregates, confusion tables, prediction traces and
//! feature rankings.

mod metrics;
mod ranking;
mod trace;

pub use metrics::{
    aggregate_cohort, confusion_percentages, evaluate, mean_confusion_percentages, Aggregate, CohortMetrics,
    ConfusionMatrix, ConfusionPercentages, Metrics,
};
pub use ranking::{cohort_frequencies, rank_features, FeatureFrequency};
pub use trace::{prediction_trace, PredictionTrace, TraceRow, WrongRun};
