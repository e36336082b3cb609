//! The `aura` command line.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use aura_core::metrics::{icc_3k, DEFAULT_SEED};
use aura_core::simulator::{generate, label_set, Scenario, ScenarioKind, ScenarioMix};
use aura_core::tuning::{enumerate_grid, GridParam, GridSpec, LabeledStream, REFERENCE_VIDEO_COUNT};
use aura_core::{detect, KeypointStream};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{EngineConfig, ModeName, Overrides};
use crate::error::{EngineError, Result};
use crate::output::{sig6, to_jsonl, write_atomic};
use crate::records::{annotations, event_records};
use crate::stream_io::{read_stream, serialize_stream};
use crate::tables::{parse_ratings, read_labels, serialize_labels};
use crate::tune::{report_records, tune, MIN_VIDEOS};
use crate::{evaluate, tables};

#[derive(Debug, Parser)]
#[command(
    name = "aura",
    version,
    about = "Keypoint-stream risk detection for unplanned extubation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default, Clone)]
pub struct ConfigArgs {
    /// TOML configuration file; absent keys take their calibrated defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeName>,
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long = "s-r")]
    pub s_r: Option<f64>,
    /// Bootstrap replicate count.
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl ConfigArgs {
    pub fn resolve(&self) -> Result<EngineConfig> {
        let overrides = Overrides {
            mode: self.mode,
            lambda: self.lambda,
            s_r: self.s_r,
            bootstrap: self.bootstrap,
            seed: self.seed,
        };
        EngineConfig::resolve(self.config.as_deref(), &overrides)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run both detectors on a stream and write the event file.
    Detect {
        #[arg(long)]
        input: PathBuf,
        /// Event file (JSON lines).
        #[arg(long)]
        output: PathBuf,
        /// Also write per-frame overlay annotations here.
        #[arg(long)]
        annotations: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Write only the per-frame overlay annotations.
    AnnotateOnly {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Generate a synthetic stream with known labels, or a labelled roster.
    Simulate {
        /// calm, reach, restless, reach_then_calm or staff_noise.
        #[arg(long)]
        kind: Option<ScenarioKind>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 6.0)]
        duration: f64,
        #[arg(long, default_value_t = 25.0)]
        fps: f64,
        #[arg(long, default_value_t = 1280)]
        width: u32,
        #[arg(long, default_value_t = 720)]
        height: u32,
        /// Safety factor kept between generated motion and each threshold.
        #[arg(long, default_value_t = 2.0)]
        margin: f64,
        /// Write a roster of N streams plus `labels.csv` into the output directory.
        #[arg(long)]
        roster: Option<usize>,
        /// Stream file, or a directory with `--roster`.
        #[arg(long)]
        output: PathBuf,
    },
    /// Run detection over a directory of streams and write a prediction table.
    Predict {
        #[arg(long)]
        streams: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Score predictions against labels with bootstrap intervals.
    Evaluate {
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        output: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Three-fold grid search over a directory of labelled streams.
    Tune {
        #[arg(long)]
        streams: PathBuf,
        #[arg(long)]
        labels: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Vary only these parameters (tau_speed, tau_valid, s_r); repeatable.
        #[arg(long = "grid-param")]
        grid_param: Vec<GridParam>,
        /// Keep label strata balanced across folds.
        #[arg(long)]
        stratify: bool,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// ICC(3,k) of a subject-by-rater table.
    Icc {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Detect {
            input,
            output,
            annotations: ann_path,
            config,
        } => {
            let cfg = config.resolve()?;
            let stream = read_stream(&input)?;
            let det = detect(&stream, &cfg.detector)?;
            write_atomic(&output, &to_jsonl(event_records(&stream, &det)?)?)?;
            if let Some(p) = ann_path {
                write_atomic(&p, &to_jsonl(annotations(&det))?)?;
            }
            Ok(())
        }
        Command::AnnotateOnly { input, output, config } => {
            let cfg = config.resolve()?;
            let stream = read_stream(&input)?;
            let det = detect(&stream, &cfg.detector)?;
            write_atomic(&output, &to_jsonl(annotations(&det))?)
        }
        Command::Simulate {
            kind,
            seed,
            duration,
            fps,
            width,
            height,
            margin,
            roster,
            output,
        } => {
            let seed = seed.unwrap_or(DEFAULT_SEED);
            let customize = |mut s: Scenario| {
                s.duration_s = duration;
                s.fps = fps;
                s.width_px = width;
                s.height_px = height;
                s.margin = margin;
                s
            };
            match roster {
                Some(n) => simulate_roster(n, kind, seed, customize, &output),
                None => {
                    let kind = kind.ok_or_else(|| EngineError::Usage("--kind is required without --roster".into()))?;
                    simulate_one(customize(Scenario::new(kind, seed)), &output)
                }
            }
        }
        Command::Predict {
            streams,
            output,
            config,
        } => {
            let cfg = config.resolve()?;
            let mut rows = BTreeMap::new();
            for s in read_stream_dir(&streams)? {
                let det = detect(&s, &cfg.detector)?;
                rows.insert(s.header().video_id.clone(), (det.collision, det.agitation));
            }
            write_atomic(&output, &serialize_labels(&rows)?)
        }
        Command::Evaluate {
            predictions,
            labels,
            output,
            config,
        } => {
            let cfg = config.resolve()?;
            let preds = read_labels(&predictions)?;
            let labels = read_labels(&labels)?;
            let recs = evaluate::evaluate(&preds, &labels, cfg.bootstrap, cfg.seed)?;
            write_atomic(&output, &to_jsonl(recs)?)
        }
        Command::Tune {
            streams,
            labels,
            output,
            grid_param,
            stratify,
            config,
        } => {
            let cfg = config.resolve()?;
            let labels = read_labels(&labels)?;
            let videos = labelled_streams(read_stream_dir(&streams)?, &labels)?;
            if videos.len() < MIN_VIDEOS {
                return Err(EngineError::Input(format!(
                    "tuning needs at least {MIN_VIDEOS} labelled streams, found {}",
                    videos.len()
                )));
            }
            if videos.len() != REFERENCE_VIDEO_COUNT {
                log::warn!(
                    "tuning {} streams; the reference protocol assumes {REFERENCE_VIDEO_COUNT}",
                    videos.len()
                );
            }
            let spec = GridSpec::reference();
            let spec = if grid_param.is_empty() {
                spec
            } else {
                spec.restrict(&grid_param)
            };
            let grid = enumerate_grid(&spec);
            let report = tune(&videos, &grid, &cfg.detector, cfg.seed, stratify)?;
            let recs = report_records(&report, videos.len(), grid.len(), cfg.seed, stratify);
            write_atomic(&output, &to_jsonl(recs)?)
        }
        Command::Icc { ratings, output } => {
            let bytes = std::fs::read(&ratings).map_err(|e| EngineError::io(&ratings, e))?;
            let table = parse_ratings(&bytes)?;
            let r = icc_3k(&table.matrix)?;
            write_atomic(
                &output,
                &to_jsonl([IccRecord::from(&r, table.subjects.len(), table.raters.len())])?,
            )
        }
    }
}

#[derive(Serialize)]
struct SidecarLabel<'a> {
    video_id: &'a str,
    kind: &'static str,
    seed: u64,
    collision: bool,
    agitation: bool,
}

/// `run.jsonl` gets its labels in `run.labels.json`.
pub fn sidecar_path(stream_path: &Path) -> PathBuf {
    stream_path.with_extension("labels.json")
}

fn simulate_one(scenario: Scenario, output: &Path) -> Result<()> {
    let g = generate(&scenario)?;
    write_atomic(output, &serialize_stream(&g.stream)?)?;
    let label = SidecarLabel {
        video_id: &scenario.video_id,
        kind: scenario.kind.as_str(),
        seed: scenario.seed,
        collision: g.expected_collision,
        agitation: g.expected_agitation,
    };
    let mut json = serde_json::to_vec(&label).map_err(|e| EngineError::Internal(e.to_string()))?;
    json.push(b'\n');
    write_atomic(&sidecar_path(output), &json)
}

fn simulate_roster(
    n: usize,
    kind: Option<ScenarioKind>,
    seed: u64,
    customize: impl Fn(Scenario) -> Scenario,
    dir: &Path,
) -> Result<()> {
    if n == 0 {
        return Err(EngineError::Usage("--roster must be at least 1".into()));
    }
    std::fs::create_dir_all(dir).map_err(|e| EngineError::io(dir, e))?;
    let mix = kind.map_or_else(ScenarioMix::reference, ScenarioMix::only);
    let mut labels = BTreeMap::new();
    for entry in label_set(n, &mix, seed) {
        let g = generate(&customize(entry.scenario.clone()))?;
        let path = dir.join(format!("{}.jsonl", entry.scenario.video_id));
        write_atomic(&path, &serialize_stream(&g.stream)?)?;
        labels.insert(entry.scenario.video_id, (entry.collision, entry.agitation));
    }
    write_atomic(&dir.join("labels.csv"), &tables::serialize_labels(&labels)?)
}

/// Every `*.jsonl` file in `dir`, in file-name order.
pub fn read_stream_dir(dir: &Path) -> Result<Vec<KeypointStream>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| EngineError::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| EngineError::io(dir, err)))
        .collect::<Result<Vec<_>>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "jsonl"));
    paths.sort();
    if paths.is_empty() {
        return Err(EngineError::Input(format!("{}: no .jsonl streams", dir.display())));
    }
    paths.iter().map(|p| read_stream(p)).collect()
}

/// Pairs streams with labels by header video id.
pub fn labelled_streams(
    streams: Vec<KeypointStream>,
    labels: &BTreeMap<String, (bool, bool)>,
) -> Result<Vec<LabeledStream>> {
    let mut by_id = BTreeMap::new();
    for s in streams {
        let id = s.header().video_id.clone();
        if by_id.insert(id.clone(), s).is_some() {
            return Err(EngineError::Input(format!("two streams share video_id {id:?}")));
        }
    }
    let unlabelled: Vec<&str> = by_id
        .keys()
        .filter(|k| !labels.contains_key(*k))
        .map(String::as_str)
        .collect();
    let missing: Vec<&str> = labels
        .keys()
        .filter(|k| !by_id.contains_key(*k))
        .map(String::as_str)
        .collect();
    if !unlabelled.is_empty() || !missing.is_empty() {
        return Err(EngineError::Input(format!(
            "streams and labels differ; unlabelled streams: [{}]; labels without stream: [{}]",
            unlabelled.join(", "),
            missing.join(", ")
        )));
    }
    Ok(by_id
        .into_iter()
        .map(|(id, stream)| {
            let (collision, agitation) = labels[&id];
            LabeledStream {
                stream,
                collision,
                agitation,
            }
        })
        .collect())
}

#[derive(Serialize)]
struct IccRecord {
    subjects: usize,
    raters: usize,
    icc: f64,
    f: Option<f64>,
    df1: f64,
    df2: f64,
    p: f64,
    ci_lo: f64,
    ci_hi: f64,
    rater_f: Option<f64>,
    rater_df1: f64,
    rater_df2: f64,
    rater_p: f64,
}

impl IccRecord {
    fn from(r: &aura_core::metrics::IccResult, subjects: usize, raters: usize) -> Self {
        let finite = |x: f64| x.is_finite().then(|| sig6(x));
        Self {
            subjects,
            raters,
            icc: sig6(r.icc),
            f: finite(r.f),
            df1: r.df1,
            df2: r.df2,
            p: sig6(r.p),
            ci_lo: sig6(r.ci_lo),
            ci_hi: sig6(r.ci_hi),
            rater_f: finite(r.rater_f),
            rater_df1: r.rater_df1,
            rater_df2: r.df2,
            rater_p: sig6(r.rater_p),
        }
    }
}
