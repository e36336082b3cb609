//! Evaluation statistics: classification metrics with bootstrap intervals and
//! ICC(3,k) inter-rater reliability.

mod bootstrap;
mod classification;
mod icc;

pub use bootstrap::{bootstrap_ci, percentile, CiEstimate, DEFAULT_REPLICATES, DEFAULT_SEED};
pub use classification::{
    classification_metrics, combined_f1, confusion, ClassificationMetrics, ConfusionMatrix, LabeledPrediction, Metric,
};
pub use icc::{icc_3k, IccResult, RatingMatrix};
