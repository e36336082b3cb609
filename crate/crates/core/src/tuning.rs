//! Parameter-robustness harness: three-fold plans, a ±10% grid over
//! `tau_speed`, `tau_valid` and `s_r`, and per-fold best-config selection by
//! combined F1.
//!
//! Each fold tunes on one block of the ids and validates on the other two, so
//! tuning sets are disjoint while validation sets overlap pairwise.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::math::round_to;
use crate::metrics::{classification_metrics, combined_f1, ClassificationMetrics, ConfusionMatrix};
use crate::pipeline::{detect, DetectorParams};
use crate::{Error, KeypointStream};

pub const FOLDS: usize = 3;
/// Video count the fold protocol is laid out for (3 x 21 tuning ids).
pub const REFERENCE_VIDEO_COUNT: usize = 63;

/// Three disjoint tuning blocks covering every id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldPlan {
    tuning: [Vec<String>; FOLDS],
}

impl FoldPlan {
    /// Splits any number (at least 3) of distinct ids into three blocks whose
    /// sizes differ by at most one. With `strata`, ids are shuffled within each
    /// label stratum and dealt round-robin so each block sees every stratum.
    pub fn build<S: AsRef<str>>(
        ids: &[S],
        seed: u64,
        strata: Option<&BTreeMap<String, (bool, bool)>>,
    ) -> Result<Self, Error> {
        let unique: BTreeSet<&str> = ids.iter().map(AsRef::as_ref).collect();
        if unique.len() != ids.len() {
            let dup = ids
                .iter()
                .map(AsRef::as_ref)
                .enumerate()
                .find(|(i, id)| ids[..*i].iter().any(|o| o.as_ref() == *id))
                .map(|(_, id)| id)
                .unwrap_or_default();
            return Err(Error::DuplicateVideoId(dup.into()));
        }
        if ids.len() < FOLDS {
            return Err(Error::FoldSize {
                expected: FOLDS,
                found: ids.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let order: Vec<String> = match strata {
            None => {
                let mut all: Vec<String> = ids.iter().map(|s| String::from(s.as_ref())).collect();
                all.shuffle(&mut rng);
                all
            }
            Some(labels) => {
                let mut groups: BTreeMap<(bool, bool), Vec<String>> = BTreeMap::new();
                for id in ids {
                    let id = id.as_ref();
                    let key = *labels.get(id).ok_or_else(|| Error::MissingVideo(id.into()))?;
                    groups.entry(key).or_default().push(id.into());
                }
                let mut all = Vec::new();
                for group in groups.values_mut() {
                    group.shuffle(&mut rng);
                    all.append(group);
                }
                all
            }
        };
        let mut tuning: [Vec<String>; FOLDS] = Default::default();
        match strata {
            Some(_) => {
                for (i, id) in order.into_iter().enumerate() {
                    tuning[i % FOLDS].push(id);
                }
            }
            None => {
                let base = ids.len() / FOLDS;
                let extra = ids.len() % FOLDS;
                let mut it = order.into_iter();
                for (f, block) in tuning.iter_mut().enumerate() {
                    let size = base + usize::from(f < extra);
                    block.extend(it.by_ref().take(size));
                }
            }
        }
        Ok(Self { tuning })
    }

    pub fn tuning(&self, fold: usize) -> &[String] {
        &self.tuning[fold]
    }

    /// Every id outside the fold's tuning block.
    pub fn validation(&self, fold: usize) -> Vec<String> {
        (0..FOLDS)
            .filter(|&f| f != fold)
            .flat_map(|f| self.tuning[f].iter().cloned())
            .collect()
    }
}

/// Deterministic shuffle of exactly 63 distinct ids into 3 tuning blocks of 21.
pub fn make_folds<S: AsRef<str>>(ids: &[S], seed: u64) -> Result<FoldPlan, Error> {
    if ids.len() != REFERENCE_VIDEO_COUNT {
        return Err(Error::FoldSize {
            expected: REFERENCE_VIDEO_COUNT,
            found: ids.len(),
        });
    }
    FoldPlan::build(ids, seed, None)
}

/// Parameters the grid varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum GridParam {
    TauSpeed,
    TauValid,
    SR,
}

impl GridParam {
    pub fn as_str(self) -> &'static str {
        match self {
            GridParam::TauSpeed => "tau_speed",
            GridParam::TauValid => "tau_valid",
            GridParam::SR => "s_r",
        }
    }
}

impl core::str::FromStr for GridParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "tau_speed" => Ok(GridParam::TauSpeed),
            "tau_valid" => Ok(GridParam::TauValid),
            "s_r" => Ok(GridParam::SR),
            other => Err(Error::InvalidParameter {
                name: "grid-param",
                reason: alloc::format!("unknown grid parameter `{other}`"),
            }),
        }
    }
}

/// Candidate values per parameter, stored as absolute values.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub tau_speed: Vec<f64>,
    pub tau_valid: Vec<f64>,
    pub s_r: Vec<f64>,
}

fn spread(base: f64, rel: f64) -> Vec<f64> {
    [1.0 - rel, 1.0, 1.0 + rel]
        .iter()
        .map(|k| round_to(k * base, 10))
        .collect()
}

impl GridSpec {
    /// `{(1 - rel) * base, base, (1 + rel) * base}` for each parameter.
    pub fn around(tau_speed: f64, tau_valid: f64, s_r: f64, rel: f64) -> Self {
        Self {
            tau_speed: spread(tau_speed, rel),
            tau_valid: spread(tau_valid, rel),
            s_r: spread(s_r, rel),
        }
    }

    /// ±10% around tau_speed 0.18, tau_valid 0.7, s_r 1.0.
    pub fn reference() -> Self {
        Self::around(0.18, 0.7, 1.0, 0.1)
    }

    /// Varies only `params`; the rest are pinned to their middle value.
    pub fn restrict(mut self, params: &[GridParam]) -> Self {
        let pin = |values: &mut Vec<f64>, p: GridParam| {
            if !params.contains(&p) && values.len() > 1 {
                let mid = values[values.len() / 2];
                *values = alloc::vec![mid];
            }
        };
        pin(&mut self.tau_speed, GridParam::TauSpeed);
        pin(&mut self.tau_valid, GridParam::TauValid);
        pin(&mut self.s_r, GridParam::SR);
        self
    }
}

/// One grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub tau_speed: f64,
    pub tau_valid: f64,
    pub s_r: f64,
}

impl GridConfig {
    /// `base` with this point's values overlaid.
    pub fn apply(&self, base: &DetectorParams) -> DetectorParams {
        let mut p = base.clone();
        p.agitation.tau_speed = self.tau_speed;
        p.set_tau_valid(self.tau_valid);
        p.collision.mode.s_r = self.s_r;
        p
    }
}

/// Cross product in canonical order: `tau_speed` slowest, `s_r` fastest.
pub fn enumerate_grid(spec: &GridSpec) -> Vec<GridConfig> {
    let mut out = Vec::with_capacity(spec.tau_speed.len() * spec.tau_valid.len() * spec.s_r.len());
    for &tau_speed in &spec.tau_speed {
        for &tau_valid in &spec.tau_valid {
            for &s_r in &spec.s_r {
                out.push(GridConfig {
                    tau_speed,
                    tau_valid,
                    s_r,
                });
            }
        }
    }
    out
}

/// A keypoint stream with its reference labels.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledStream {
    pub stream: KeypointStream,
    pub collision: bool,
    pub agitation: bool,
}

impl LabeledStream {
    pub fn video_id(&self) -> &str {
        &self.stream.header().video_id
    }
}

/// Metrics of one configuration on one set of videos.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigEvaluation {
    pub collision: ClassificationMetrics,
    pub agitation: ClassificationMetrics,
    pub combined_f1: Option<f64>,
}

impl ConfigEvaluation {
    fn from_confusion(collision: &ConfusionMatrix, agitation: &ConfusionMatrix) -> Self {
        let collision = classification_metrics(collision);
        let agitation = classification_metrics(agitation);
        Self {
            combined_f1: combined_f1(collision.f1, agitation.f1),
            collision,
            agitation,
        }
    }

    /// Combined F1 could not be computed on this set.
    pub fn flagged(&self) -> bool {
        self.combined_f1.is_none()
    }

    /// Selection objective; flagged evaluations score negative infinity.
    pub fn objective(&self) -> f64 {
        self.combined_f1.unwrap_or(f64::NEG_INFINITY)
    }
}

/// Video-level `(collision, agitation)` predictions of `config` on `stream`.
pub fn predict(config: &GridConfig, stream: &KeypointStream, base: &DetectorParams) -> Result<(bool, bool), Error> {
    let d = detect(stream, &config.apply(base))?;
    Ok((d.collision, d.agitation))
}

pub fn evaluate_config(
    config: &GridConfig,
    videos: &[LabeledStream],
    base: &DetectorParams,
) -> Result<ConfigEvaluation, Error> {
    let mut c = ConfusionMatrix::default();
    let mut a = ConfusionMatrix::default();
    for v in videos {
        let (pc, pa) = predict(config, &v.stream, base)?;
        c.record(pc, v.collision);
        a.record(pa, v.agitation);
    }
    Ok(ConfigEvaluation::from_confusion(&c, &a))
}

/// Predictions of every configuration on every video.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionTable {
    configs: Vec<GridConfig>,
    /// `rows[config][video]` in `video_ids` order.
    rows: Vec<Vec<(bool, bool)>>,
    video_ids: Vec<String>,
}

impl PredictionTable {
    pub fn new(configs: Vec<GridConfig>, video_ids: Vec<String>, rows: Vec<Vec<(bool, bool)>>) -> Self {
        assert_eq!(configs.len(), rows.len(), "one prediction row per config");
        assert!(
            rows.iter().all(|r| r.len() == video_ids.len()),
            "one prediction per video"
        );
        Self {
            configs,
            rows,
            video_ids,
        }
    }

    /// Runs every configuration over every video.
    pub fn compute(configs: &[GridConfig], videos: &[LabeledStream], base: &DetectorParams) -> Result<Self, Error> {
        let rows = configs
            .iter()
            .map(|c| videos.iter().map(|v| predict(c, &v.stream, base)).collect())
            .collect::<Result<Vec<Vec<_>>, Error>>()?;
        let ids = videos.iter().map(|v| String::from(v.video_id())).collect();
        Ok(Self::new(configs.to_vec(), ids, rows))
    }

    pub fn configs(&self) -> &[GridConfig] {
        &self.configs
    }

    fn evaluate(
        &self,
        config: usize,
        ids: &[String],
        position: &BTreeMap<&str, usize>,
        labels: &BTreeMap<String, (bool, bool)>,
    ) -> Result<ConfigEvaluation, Error> {
        let mut c = ConfusionMatrix::default();
        let mut a = ConfusionMatrix::default();
        for id in ids {
            let &(lc, la) = labels.get(id).ok_or_else(|| Error::MissingVideo(id.clone()))?;
            let &i = position
                .get(id.as_str())
                .ok_or_else(|| Error::MissingVideo(id.clone()))?;
            let (pc, pa) = self.rows[config][i];
            c.record(pc, lc);
            a.record(pa, la);
        }
        Ok(ConfigEvaluation::from_confusion(&c, &a))
    }
}

/// One configuration scored on one fold's tuning set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TuningRecord {
    pub fold: usize,
    pub config_index: usize,
    pub config: GridConfig,
    pub tuning: ConfigEvaluation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub fold: usize,
    pub best_index: usize,
    pub best_config: GridConfig,
    pub tuning: ConfigEvaluation,
    pub validation: ConfigEvaluation,
    pub tuning_size: usize,
    pub validation_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TuningReport {
    pub evaluations: Vec<TuningRecord>,
    pub folds: Vec<FoldResult>,
    /// Range (max - min) of validation combined F1 across folds; `None` if
    /// any fold's value is undefined.
    pub cross_fold_deviation: Option<f64>,
}

/// Selects the best configuration per fold from precomputed predictions.
///
/// The argmax of tuning combined F1 wins; ties go to the earliest config in
/// canonical order.
pub fn select(
    plan: &FoldPlan,
    table: &PredictionTable,
    labels: &BTreeMap<String, (bool, bool)>,
) -> Result<TuningReport, Error> {
    if table.configs.is_empty() {
        return Err(Error::Empty("configuration grid"));
    }
    let position: BTreeMap<&str, usize> = table
        .video_ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.as_str(), i))
        .collect();
    let mut evaluations = Vec::new();
    let mut folds = Vec::new();
    for fold in 0..FOLDS {
        let tuning_ids = plan.tuning(fold);
        let validation_ids = plan.validation(fold);
        let mut best: Option<(usize, ConfigEvaluation)> = None;
        for (i, config) in table.configs.iter().enumerate() {
            let eval = table.evaluate(i, tuning_ids, &position, labels)?;
            evaluations.push(TuningRecord {
                fold,
                config_index: i,
                config: *config,
                tuning: eval,
            });
            if best.is_none_or(|(_, b)| eval.objective() > b.objective()) {
                best = Some((i, eval));
            }
        }
        let (best_index, tuning) = best.expect("grid is non-empty");
        folds.push(FoldResult {
            fold,
            best_index,
            best_config: table.configs[best_index],
            tuning,
            validation: table.evaluate(best_index, &validation_ids, &position, labels)?,
            tuning_size: tuning_ids.len(),
            validation_size: validation_ids.len(),
        });
    }
    let values: Option<Vec<f64>> = folds.iter().map(|f| f.validation.combined_f1).collect();
    let cross_fold_deviation = values.map(|v| {
        let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = v.iter().copied().fold(f64::INFINITY, f64::min);
        max - min
    });
    Ok(TuningReport {
        evaluations,
        folds,
        cross_fold_deviation,
    })
}

/// Runs the full protocol sequentially.
pub fn run_folds(
    plan: &FoldPlan,
    grid: &[GridConfig],
    videos: &[LabeledStream],
    base: &DetectorParams,
) -> Result<TuningReport, Error> {
    let labels: BTreeMap<String, (bool, bool)> = videos
        .iter()
        .map(|v| (String::from(v.video_id()), (v.collision, v.agitation)))
        .collect();
    for fold in 0..FOLDS {
        if let Some(missing) = plan.tuning(fold).iter().find(|id| !labels.contains_key(*id)) {
            return Err(Error::MissingVideo(missing.clone()));
        }
    }
    let table = PredictionTable::compute(grid, videos, base)?;
    select(plan, &table, &labels)
}
