use alloc::collections::BTreeSet;
use alloc::string::String;

use crate::Error;

/// 2x2 tally of binary predictions against reference labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub fp: u64,
    pub fn_: u64,
    pub tn: u64,
}

impl ConfusionMatrix {
    pub const fn new(tp: u64, fp: u64, fn_: u64, tn: u64) -> Self {
        Self { tp, fp, fn_, tn }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.fn_ + self.tn
    }

    pub fn record(&mut self, predicted: bool, actual: bool) {
        match (predicted, actual) {
            (true, true) => self.tp += 1,
            (true, false) => self.fp += 1,
            (false, true) => self.fn_ += 1,
            (false, false) => self.tn += 1,
        }
    }
}

/// One video-level prediction with its reference label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledPrediction {
    pub video_id: String,
    pub predicted: bool,
    pub actual: bool,
}

impl LabeledPrediction {
    pub fn new(video_id: impl Into<String>, predicted: bool, actual: bool) -> Self {
        Self {
            video_id: video_id.into(),
            predicted,
            actual,
        }
    }
}

pub fn confusion(preds: &[LabeledPrediction]) -> Result<ConfusionMatrix, Error> {
    if preds.is_empty() {
        return Err(Error::Empty("prediction set"));
    }
    let mut seen = BTreeSet::new();
    let mut cm = ConfusionMatrix::default();
    for p in preds {
        if !seen.insert(p.video_id.as_str()) {
            return Err(Error::DuplicateVideoId(p.video_id.clone()));
        }
        cm.record(p.predicted, p.actual);
    }
    Ok(cm)
}

/// Accuracy, precision, recall and F1. `None` marks an undefined value (a
/// zero denominator), never a silent zero.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ClassificationMetrics {
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn classification_metrics(cm: &ConfusionMatrix) -> ClassificationMetrics {
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = match (precision, recall) {
        (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
        (Some(_), Some(_)) => Some(0.0),
        _ => None,
    };
    ClassificationMetrics {
        accuracy: ratio(cm.tp + cm.tn, cm.total()),
        precision,
        recall,
        f1,
    }
}

/// Which metric a bootstrap interval or report row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1];

    pub fn of(self, m: &ClassificationMetrics) -> Option<f64> {
        match self {
            Metric::Accuracy => m.accuracy,
            Metric::Precision => m.precision,
            Metric::Recall => m.recall,
            Metric::F1 => m.f1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
        }
    }
}

/// Mean of collision F1 and agitation F1; undefined if either is.
pub fn combined_f1(f1_collision: Option<f64>, f1_agitation: Option<f64>) -> Option<f64> {
    Some((f1_collision? + f1_agitation?) / 2.0)
}
