//! Cross-validated grid search over a directory of labelled streams.

use std::collections::BTreeMap;

use aura_core::tuning::{predict, select, FoldPlan, GridConfig, LabeledStream, PredictionTable, TuningReport};
use aura_core::DetectorParams;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::output::{sig6, sig6_opt};

/// Fewest videos accepted by [`tune`]: two per fold block.
pub const MIN_VIDEOS: usize = 6;

/// Computes every config's predictions in parallel, then selects per fold.
/// The table is assembled in canonical order, so the result does not depend
/// on thread scheduling.
pub fn tune(
    videos: &[LabeledStream],
    grid: &[GridConfig],
    base: &DetectorParams,
    seed: u64,
    stratify: bool,
) -> Result<TuningReport> {
    let labels: BTreeMap<String, (bool, bool)> = videos
        .iter()
        .map(|v| (v.video_id().to_string(), (v.collision, v.agitation)))
        .collect();
    let ids: Vec<&str> = videos.iter().map(LabeledStream::video_id).collect();
    let plan = FoldPlan::build(&ids, seed, stratify.then_some(&labels))?;

    let cells: Vec<(usize, usize)> = (0..grid.len())
        .flat_map(|c| (0..videos.len()).map(move |v| (c, v)))
        .collect();
    let flat = cells
        .par_iter()
        .map(|&(c, v)| predict(&grid[c], &videos[v].stream, base))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let rows = flat.chunks(videos.len().max(1)).map(<[_]>::to_vec).collect::<Vec<_>>();
    let rows = if videos.is_empty() {
        vec![Vec::new(); grid.len()]
    } else {
        rows
    };
    let table = PredictionTable::new(grid.to_vec(), ids.iter().map(|s| s.to_string()).collect(), rows);
    Ok(select(&plan, &table, &labels)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TuneRecord {
    Evaluation {
        fold: usize,
        config_index: usize,
        tau_speed: f64,
        tau_valid: f64,
        s_r: f64,
        collision_f1: Option<f64>,
        agitation_f1: Option<f64>,
        combined_f1: Option<f64>,
        flagged: bool,
    },
    Fold {
        fold: usize,
        best_index: usize,
        tau_speed: f64,
        tau_valid: f64,
        s_r: f64,
        tuning_combined_f1: Option<f64>,
        validation_collision_f1: Option<f64>,
        validation_agitation_f1: Option<f64>,
        validation_combined_f1: Option<f64>,
        tuning_size: usize,
        validation_size: usize,
    },
    Summary {
        videos: usize,
        folds: usize,
        configs: usize,
        evaluations: usize,
        seed: u64,
        stratified: bool,
        cross_fold_deviation: Option<f64>,
    },
}

pub fn report_records(
    report: &TuningReport,
    videos: usize,
    configs: usize,
    seed: u64,
    stratified: bool,
) -> Vec<TuneRecord> {
    let mut out: Vec<TuneRecord> = report
        .evaluations
        .iter()
        .map(|e| TuneRecord::Evaluation {
            fold: e.fold,
            config_index: e.config_index,
            tau_speed: sig6(e.config.tau_speed),
            tau_valid: sig6(e.config.tau_valid),
            s_r: sig6(e.config.s_r),
            collision_f1: sig6_opt(e.tuning.collision.f1),
            agitation_f1: sig6_opt(e.tuning.agitation.f1),
            combined_f1: sig6_opt(e.tuning.combined_f1),
            flagged: e.tuning.flagged(),
        })
        .collect();
    out.extend(report.folds.iter().map(|f| TuneRecord::Fold {
        fold: f.fold,
        best_index: f.best_index,
        tau_speed: sig6(f.best_config.tau_speed),
        tau_valid: sig6(f.best_config.tau_valid),
        s_r: sig6(f.best_config.s_r),
        tuning_combined_f1: sig6_opt(f.tuning.combined_f1),
        validation_collision_f1: sig6_opt(f.validation.collision.f1),
        validation_agitation_f1: sig6_opt(f.validation.agitation.f1),
        validation_combined_f1: sig6_opt(f.validation.combined_f1),
        tuning_size: f.tuning_size,
        validation_size: f.validation_size,
    }));
    out.push(TuneRecord::Summary {
        videos,
        folds: report.folds.len(),
        configs,
        evaluations: report.evaluations.len(),
        seed,
        stratified,
        cross_fold_deviation: sig6_opt(report.cross_fold_deviation),
    });
    out
}
