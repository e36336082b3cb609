//! Video-level classification reports with bootstrap intervals.

use std::collections::BTreeMap;

use aura_core::metrics::{bootstrap_ci, classification_metrics, confusion, LabeledPrediction, Metric};
use aura_core::Error as CoreError;
use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::output::{sig6, sig6_opt};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Behavior {
    Collision,
    Agitation,
}

impl Behavior {
    pub const BOTH: [Behavior; 2] = [Behavior::Collision, Behavior::Agitation];

    pub fn as_str(self) -> &'static str {
        match self {
            Behavior::Collision => "collision",
            Behavior::Agitation => "agitation",
        }
    }

    fn pick(self, flags: (bool, bool)) -> bool {
        match self {
            Behavior::Collision => flags.0,
            Behavior::Agitation => flags.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ReportRecord {
    Confusion {
        behavior: &'static str,
        tp: u64,
        fp: u64,
        #[serde(rename = "fn")]
        fn_: u64,
        tn: u64,
    },
    Metric {
        behavior: &'static str,
        metric: &'static str,
        point: Option<f64>,
        ci_lo: Option<f64>,
        ci_hi: Option<f64>,
        #[serde(rename = "B")]
        b: usize,
        seed: u64,
        /// Replicates on which the metric was undefined.
        skipped: usize,
    },
}

/// Pairs predictions with labels by video id. Any id present in only one
/// table is an error listing every such id.
pub fn align(
    predictions: &BTreeMap<String, (bool, bool)>,
    labels: &BTreeMap<String, (bool, bool)>,
    behavior: Behavior,
) -> Result<Vec<LabeledPrediction>> {
    let missing_pred: Vec<&str> = labels
        .keys()
        .filter(|k| !predictions.contains_key(*k))
        .map(String::as_str)
        .collect();
    let missing_label: Vec<&str> = predictions
        .keys()
        .filter(|k| !labels.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !missing_pred.is_empty() || !missing_label.is_empty() {
        let mut msg = String::from("prediction and label ids differ");
        if !missing_pred.is_empty() {
            msg.push_str(&format!("; missing predictions: {}", missing_pred.join(", ")));
        }
        if !missing_label.is_empty() {
            msg.push_str(&format!("; missing labels: {}", missing_label.join(", ")));
        }
        return Err(EngineError::Input(msg));
    }
    Ok(labels
        .iter()
        .map(|(id, &l)| LabeledPrediction::new(id.clone(), behavior.pick(predictions[id]), behavior.pick(l)))
        .collect())
}

/// Confusion counts and the four metrics with percentile intervals for each
/// behaviour.
pub fn evaluate(
    predictions: &BTreeMap<String, (bool, bool)>,
    labels: &BTreeMap<String, (bool, bool)>,
    replicates: usize,
    seed: u64,
) -> Result<Vec<ReportRecord>> {
    let mut out = Vec::new();
    for behavior in Behavior::BOTH {
        let preds = align(predictions, labels, behavior)?;
        let cm = confusion(&preds)?;
        out.push(ReportRecord::Confusion {
            behavior: behavior.as_str(),
            tp: cm.tp,
            fp: cm.fp,
            fn_: cm.fn_,
            tn: cm.tn,
        });
        let point_metrics = classification_metrics(&cm);
        for metric in Metric::ALL {
            let (point, ci_lo, ci_hi, skipped) = match bootstrap_ci(&preds, metric, replicates, seed) {
                Ok(ci) => (Some(ci.point), Some(ci.lo), Some(ci.hi), ci.skipped),
                Err(CoreError::UndefinedMetric) => (None, None, None, 0),
                Err(CoreError::AllReplicatesUndefined) => (metric.of(&point_metrics), None, None, replicates),
                Err(e) => return Err(e.into()),
            };
            out.push(ReportRecord::Metric {
                behavior: behavior.as_str(),
                metric: metric.as_str(),
                point: sig6_opt(point),
                ci_lo: ci_lo.map(sig6),
                ci_hi: ci_hi.map(sig6),
                b: replicates,
                seed,
                skipped,
            });
        }
    }
    Ok(out)
}
