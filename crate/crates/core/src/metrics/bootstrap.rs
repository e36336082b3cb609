use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{classification_metrics, confusion, ConfusionMatrix, LabeledPrediction, Metric};
use crate::Error;

pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_SEED: u64 = 20_240_613;

/// Percentile bootstrap interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiEstimate {
    pub point: f64,
    /// 2.5th percentile of the replicate distribution.
    pub lo: f64,
    /// 97.5th percentile of the replicate distribution.
    pub hi: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Replicates dropped because the metric was undefined on the resample.
    pub skipped: usize,
}

/// Linear-interpolation percentile of sorted data, `q` in `[0, 1]`.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Replicate `r` draws from its own ChaCha stream keyed by `(seed, r)`, so
/// replicates can be evaluated in any order.
fn replicate(preds: &[LabeledPrediction], seed: u64, r: u64) -> ConfusionMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r);
    let mut cm = ConfusionMatrix::default();
    for _ in 0..preds.len() {
        let p = &preds[rng.random_range(0..preds.len())];
        cm.record(p.predicted, p.actual);
    }
    cm
}

/// Resamples videos with replacement `replicates` times and reports the
/// 2.5/97.5 percentile interval of `metric`.
pub fn bootstrap_ci(
    preds: &[LabeledPrediction],
    metric: Metric,
    replicates: usize,
    seed: u64,
) -> Result<CiEstimate, Error> {
    if replicates == 0 {
        return Err(Error::InvalidParameter {
            name: "bootstrap",
            reason: "replicate count must be at least 1".into(),
        });
    }
    let point = metric
        .of(&classification_metrics(&confusion(preds)?))
        .ok_or(Error::UndefinedMetric)?;
    let mut values: Vec<f64> = (0..replicates as u64)
        .filter_map(|r| metric.of(&classification_metrics(&replicate(preds, seed, r))))
        .collect();
    if values.is_empty() {
        return Err(Error::AllReplicatesUndefined);
    }
    values.sort_by(f64::total_cmp);
    Ok(CiEstimate {
        point,
        lo: percentile(&values, 0.025),
        hi: percentile(&values, 0.975),
        replicates,
        seed,
        skipped: replicates - values.len(),
    })
}
