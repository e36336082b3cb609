//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Every tolerance and time budget is a named
//! constant below.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use aura_core::collision::{overlap_score, proximity_score, CollisionParams, CollisionTrack};
use aura_core::geometry::AuraMode;
use aura_core::metrics::{
    bootstrap_ci, classification_metrics, icc_3k, ConfusionMatrix, LabeledPrediction, Metric, RatingMatrix,
    DEFAULT_REPLICATES, DEFAULT_SEED,
};
use aura_core::simulator::{generate, label_set, Scenario, ScenarioKind, ScenarioMix};
use aura_core::tuning::{enumerate_grid, make_folds, GridSpec, LabeledStream, FOLDS};
use aura_core::{detect, DetectorParams, KeypointFrame, KeypointStream, Landmark, LandmarkId, Side, StreamHeader};
use aura_engine::tune::tune;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCORE_SAMPLES: usize = 10_000;
const SCORE_BUDGET: Duration = Duration::from_secs(1);
const PERSISTENCE_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_SEEDS_PER_KIND: u64 = 100;
const ORACLE_BUDGET: Duration = Duration::from_secs(30);
const REPORTED_POINT_TOL: f64 = 0.005;
const REPORTED_CI_ENDPOINT_TOL: f64 = 0.05;
const REPORTED_BUDGET: Duration = Duration::from_secs(10);
const ICC_TOL: f64 = 1e-9;
const ICC_BUDGET: Duration = Duration::from_secs(1);
const SCALE_TOL: f64 = 1e-9;
const SCALE_BUDGET: Duration = Duration::from_secs(5);
const TUNING_DEVIATION_BOUND: f64 = 0.05;
const TUNING_BUDGET: Duration = Duration::from_secs(120);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    let in_budget = elapsed <= budget;
    o.detail = format!(
        "{}; {:.3} s of {:.0} s budget",
        o.detail,
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    o.pass &= in_budget;
    o
}

// ---------------------------------------------------------------- 1

fn score_functions() -> Outcome {
    let p = CollisionParams::default();
    let combined = p.r_h_base + p.r_m_base;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut failures = Vec::new();
    for _ in 0..SCORE_SAMPLES {
        let (a, b) = (
            rng.random_range(0.0..2.0 * combined),
            rng.random_range(0.0..2.0 * combined),
        );
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s_lo, s_hi) = (
            overlap_score(lo, p.r_h_base, p.r_m_base),
            overlap_score(hi, p.r_h_base, p.r_m_base),
        );
        if !(0.0..=1.0).contains(&s_lo) || !(0.0..=1.0).contains(&s_hi) || s_lo < s_hi {
            failures.push(format!("overlap({lo}) = {s_lo}, overlap({hi}) = {s_hi}"));
        }
        let (a, b) = (
            rng.random_range(0.0..2.0 * p.tau_base),
            rng.random_range(0.0..2.0 * p.tau_base),
        );
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (s_lo, s_hi) = (proximity_score(lo, p.tau_base), proximity_score(hi, p.tau_base));
        if !(0.0..=1.0).contains(&s_lo) || !(0.0..=1.0).contains(&s_hi) || s_lo < s_hi {
            failures.push(format!("proximity({lo}) = {s_lo}, proximity({hi}) = {s_hi}"));
        }
    }
    let exact = [
        ("overlap(0)", overlap_score(0.0, p.r_h_base, p.r_m_base), 1.0),
        ("overlap(250 px)", overlap_score(250.0, p.r_h_base, p.r_m_base), 0.0),
        ("proximity(0)", proximity_score(0.0, p.tau_base), 1.0),
        ("proximity(0.3)", proximity_score(0.3, p.tau_base), 0.0),
    ];
    for (name, got, want) in exact {
        if got != want {
            failures.push(format!("{name} = {got}, expected exactly {want}"));
        }
    }
    let pass = failures.is_empty() && combined == 250.0 && p.tau_base == 0.3;
    outcome(
        pass,
        format!(
            "{SCORE_SAMPLES} sample pairs per score, {} violations{}",
            failures.len(),
            first(&failures)
        ),
    )
}

fn first(v: &[String]) -> String {
    v.first().map(|s| format!(" (first: {s})")).unwrap_or_default()
}

// ---------------------------------------------------------------- 2

const FPS: f64 = 25.0;

fn header() -> StreamHeader {
    StreamHeader::new("persistence", FPS, 1280, 720)
}

/// Mouth at (0.5, 0.3); the left wrist either on the mouth or far away.
fn frame(i: u64, risk: bool) -> KeypointFrame {
    let lm = |x, y| Landmark::new(x, y, 0.0, 1.0);
    let wrist = if risk { lm(0.5, 0.3) } else { lm(0.1, 0.9) };
    KeypointFrame::new(i, i as f64 / FPS)
        .with(LandmarkId::mouth(Side::Left), lm(0.49, 0.3))
        .with(LandmarkId::mouth(Side::Right), lm(0.51, 0.3))
        .with(LandmarkId::wrist(Side::Left), wrist)
}

/// Runs a risk pattern through a track and returns confirmed events as
/// onset frame indices.
fn confirmed_onsets(pattern: &[bool]) -> Vec<u64> {
    let params = CollisionParams::default();
    let h = header();
    let mut track = CollisionTrack::new();
    for (i, &r) in pattern.iter().enumerate() {
        track.step(&frame(i as u64, r), &h, &params).expect("ordered frames");
    }
    track
        .finish()
        .iter()
        .map(|e| (e.onset_s * FPS).round() as u64)
        .collect()
}

/// Maximal risk runs as (start frame, length).
fn runs(pattern: &[bool]) -> Vec<(u64, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < pattern.len() {
        if pattern[i] {
            let start = i;
            while i < pattern.len() && pattern[i] {
                i += 1;
            }
            out.push((start as u64, i - start));
        } else {
            i += 1;
        }
    }
    out
}

fn persistence() -> Outcome {
    let tau_duration = CollisionParams::default().tau_duration;
    let mut failures = Vec::new();

    // Eight risk frames span 0.28 s, nine span 0.32 s.
    let mut eight = vec![false; 2];
    eight.extend([true; 8]);
    eight.extend([false; 2]);
    let mut nine = vec![false; 2];
    nine.extend([true; 9]);
    nine.extend([false; 2]);
    let (n8, n9) = (confirmed_onsets(&eight).len(), confirmed_onsets(&nine).len());
    if n8 != 0 || n9 != 1 {
        failures.push(format!("8-frame run gave {n8} events, 9-frame run gave {n9}"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut cases = 0;
    for _ in 0..500 {
        let mut pattern = Vec::new();
        for _ in 0..rng.random_range(1..6) {
            pattern.extend(std::iter::repeat_n(false, rng.random_range(1..4)));
            pattern.extend(std::iter::repeat_n(true, rng.random_range(1..20)));
        }
        pattern.extend(std::iter::repeat_n(false, rng.random_range(0..3)));
        let expected: Vec<u64> = runs(&pattern)
            .into_iter()
            .filter(|&(_, len)| (len - 1) as f64 / FPS > tau_duration)
            .map(|(start, _)| start)
            .collect();
        let got = confirmed_onsets(&pattern);
        if got != expected {
            failures.push(format!("pattern {pattern:?}: onsets {got:?}, expected {expected:?}"));
        }
        cases += 1;
    }
    outcome(
        failures.is_empty(),
        format!(
            "8/9-frame pair {n8}/{n9} events, {cases} random interval sequences, {} mismatches{}",
            failures.len(),
            first(&failures)
        ),
    )
}

// ---------------------------------------------------------------- 3

fn oracle() -> Outcome {
    let modes = [("fixed", AuraMode::default()), ("relative", AuraMode::relative(2.0))];
    let mut total = 0;
    let mut failures = Vec::new();
    for kind in ScenarioKind::ALL {
        for seed in 0..ORACLE_SEEDS_PER_KIND {
            let mut scenario = Scenario::new(kind, seed);
            scenario.margin = 2.0;
            let g = match generate(&scenario) {
                Ok(g) => g,
                Err(e) => {
                    failures.push(format!("{kind}/{seed}: {e}"));
                    continue;
                }
            };
            for (name, mode) in modes {
                total += 1;
                let d = detect(&g.stream, &DetectorParams::default().with_mode(mode)).expect("valid stream");
                if (d.collision, d.agitation) != (g.expected_collision, g.expected_agitation) {
                    failures.push(format!(
                        "{kind}/{seed}/{name}: got ({}, {}), expected ({}, {})",
                        d.collision, d.agitation, g.expected_collision, g.expected_agitation
                    ));
                }
            }
        }
    }
    let agree = total - failures.len();
    outcome(
        failures.is_empty(),
        format!(
            "{agree}/{total} scenario runs agree ({ORACLE_SEEDS_PER_KIND} seeds x 5 kinds x 2 modes){}",
            first(&failures)
        ),
    )
}

// ---------------------------------------------------------------- 4

fn predictions(cm: ConfusionMatrix) -> Vec<LabeledPrediction> {
    let mut out = Vec::new();
    let mut push = |n: u64, predicted, actual| {
        for _ in 0..n {
            out.push(LabeledPrediction::new(format!("v{:02}", out.len()), predicted, actual));
        }
    };
    push(cm.tp, true, true);
    push(cm.fp, true, false);
    push(cm.fn_, false, true);
    push(cm.tn, false, false);
    out
}

fn reported_metrics() -> Outcome {
    // (name, matrix, [accuracy, precision, recall, f1], F1 interval)
    let rows = [
        (
            "collision",
            ConfusionMatrix::new(24, 1, 0, 38),
            [0.98, 0.96, 1.00, 0.98],
            (0.93, 1.00),
        ),
        (
            "agitation",
            ConfusionMatrix::new(16, 2, 7, 38),
            [0.86, 0.89, 0.70, 0.78],
            (0.62, 1.00),
        ),
    ];
    let mut failures = Vec::new();
    let mut details = Vec::new();
    for (name, cm, reported, (ci_lo, ci_hi)) in rows {
        let m = classification_metrics(&cm);
        for (metric, want) in Metric::ALL.into_iter().zip(reported) {
            let got = metric.of(&m).unwrap_or(f64::NAN);
            let rounded = (got * 100.0).round() / 100.0;
            if got.is_nan() || (rounded - want).abs() > REPORTED_POINT_TOL {
                failures.push(format!(
                    "{name} {}: {got:.4} rounds to {rounded}, reported {want}",
                    metric.as_str()
                ));
            }
        }
        let preds = predictions(cm);
        let ci = match bootstrap_ci(&preds, Metric::F1, DEFAULT_REPLICATES, DEFAULT_SEED) {
            Ok(ci) => ci,
            Err(e) => {
                failures.push(format!("{name} bootstrap: {e}"));
                continue;
            }
        };
        // Intervals overlap once each reported endpoint is widened by the tolerance.
        let overlaps = ci.lo <= ci_hi + REPORTED_CI_ENDPOINT_TOL && ci.hi >= ci_lo - REPORTED_CI_ENDPOINT_TOL;
        if !overlaps {
            failures.push(format!(
                "{name} F1 interval [{:.3}, {:.3}] misses [{ci_lo}, {ci_hi}]",
                ci.lo, ci.hi
            ));
        }
        details.push(format!(
            "{name} F1 {:.3} [{:.3}, {:.3}] vs reported [{ci_lo:.2}, {ci_hi:.2}] (endpoint deltas {:+.3}, {:+.3})",
            ci.point,
            ci.lo,
            ci.hi,
            ci.lo - ci_lo,
            ci.hi - ci_hi
        ));
    }
    outcome(
        failures.is_empty(),
        format!("{}{}", details.join("; "), first(&failures)),
    )
}

// ---------------------------------------------------------------- 5

fn icc() -> Outcome {
    let mut failures = Vec::new();
    let oracle = RatingMatrix::from_rows(&[[9.0, 2.0, 5.0], [6.0, 1.0, 3.0], [8.0, 4.0, 6.0], [7.0, 1.0, 2.0]])
        .expect("rectangular");
    // Two-way ANOVA by hand: SS_subjects 17, SS_raters 62, SS_error 4 on 3, 2 and 6 df.
    let r = icc_3k(&oracle).expect("non-degenerate");
    let checks = [
        ("ICC", r.icc, 15.0 / 17.0),
        ("F", r.f, 8.5),
        ("df1", r.df1, 3.0),
        ("df2", r.df2, 6.0),
        ("MS_subjects", r.ms_subjects, 17.0 / 3.0),
        ("MS_raters", r.ms_raters, 31.0),
        ("MS_error", r.ms_error, 2.0 / 3.0),
        ("p", r.p, 0.013_992_583_453_201_96),
    ];
    for (name, got, want) in checks {
        if got.is_nan() || (got - want).abs() > ICC_TOL {
            failures.push(format!("{name} = {got}, expected {want}"));
        }
    }

    let identical: Vec<[f64; 4]> = (0..10).map(|i| [f64::from(i); 4]).collect();
    let same = icc_3k(&RatingMatrix::from_rows(&identical).expect("rectangular")).expect("defined");
    if same.icc != 1.0 {
        failures.push(format!("identical raters ICC = {}", same.icc));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let big: Vec<Vec<f64>> = (0..63)
        .map(|s| (0..9).map(|_| f64::from(s % 7) + rng.random_range(0.0..3.0)).collect())
        .collect();
    let big = icc_3k(&RatingMatrix::from_rows(&big).expect("rectangular")).expect("defined");
    if big.df2 != 496.0 || big.df1 != 62.0 || big.rater_df1 != 8.0 {
        failures.push(format!(
            "63x9 df = ({}, {}), rater df1 = {}",
            big.df1, big.df2, big.rater_df1
        ));
    }
    outcome(
        failures.is_empty(),
        format!(
            "4x3 oracle ICC {:.6}, identical-rater ICC {}, 63x9 df ({}, {}) with rater df1 {}{}",
            r.icc,
            same.icc,
            big.df1,
            big.df2,
            big.rater_df1,
            first(&failures)
        ),
    )
}

// ---------------------------------------------------------------- 6

fn max_overlap_difference(a: &KeypointStream, b: &KeypointStream, params: &CollisionParams) -> f64 {
    let (mut ta, mut tb) = (CollisionTrack::new(), CollisionTrack::new());
    let mut worst: f64 = 0.0;
    for (fa, fb) in a.frames().iter().zip(b.frames()) {
        let ra = ta.step(fa, a.header(), params).expect("ordered");
        let rb = tb.step(fb, b.header(), params).expect("ordered");
        for side in Side::BOTH {
            worst = worst.max((ra.hand(side).overlap - rb.hand(side).overlap).abs());
        }
    }
    worst
}

fn scale_invariance() -> Outcome {
    let params = CollisionParams {
        mode: AuraMode::relative(2.0),
        ..CollisionParams::default()
    };
    let mut target: f64 = 0.0;
    let mut uniform: f64 = 0.0;
    let mut nonzero = 0usize;
    for kind in ScenarioKind::ALL {
        for seed in 0..4 {
            let s = generate(&Scenario::new(kind, seed)).expect("scenario").stream;
            let h = s.header().clone();
            let hd = |w, h_px| StreamHeader::new(h.video_id.clone(), h.fps, w, h_px);
            let base = s.with_header(hd(1280, 720)).expect("valid header");
            let small = s.with_header(hd(854, 480)).expect("valid header");
            let half = s.with_header(hd(640, 360)).expect("valid header");
            target = target.max(max_overlap_difference(&base, &small, &params));
            uniform = uniform.max(max_overlap_difference(&base, &half, &params));
            let mut track = CollisionTrack::new();
            for f in base.frames() {
                let r = track.step(f, base.header(), &params).expect("ordered");
                nonzero += r.hands.iter().filter(|hr| hr.overlap > 0.0).count();
            }
        }
    }
    outcome(
        target <= SCALE_TOL,
        format!(
            "max |overlap diff| 1280x720 vs 854x480 = {target:.3e} (tolerance {SCALE_TOL:e}); \
             uniform 1280x720 vs 640x360 = {uniform:.3e}; {nonzero} hand-frames with positive overlap"
        ),
    )
}

// ---------------------------------------------------------------- 7

fn tuning() -> Outcome {
    let mut failures = Vec::new();
    let grid = enumerate_grid(&GridSpec::reference());
    let close = |a: f64, b: f64| (a - b).abs() < 1e-9;
    if grid.len() != 27 {
        failures.push(format!("grid has {} configs", grid.len()));
    }
    if !grid
        .iter()
        .any(|c| close(c.tau_speed, 0.18) && close(c.tau_valid, 0.63) && close(c.s_r, 0.9))
    {
        failures.push("grid lacks (0.18, 0.63, 0.9)".into());
    }

    let roster = label_set(63, &ScenarioMix::reference(), DEFAULT_SEED);
    let ids: Vec<&str> = roster.iter().map(|l| l.scenario.video_id.as_str()).collect();
    let plan = make_folds(&ids, DEFAULT_SEED).expect("63 ids");
    let mut seen = BTreeSet::new();
    for f in 0..FOLDS {
        let t = plan.tuning(f);
        if t.len() != 21 {
            failures.push(format!("fold {f} tuning set has {} ids", t.len()));
        }
        if plan.validation(f).len() != 42 {
            failures.push(format!("fold {f} validation set has {} ids", plan.validation(f).len()));
        }
        for id in t {
            if !seen.insert(id.clone()) {
                failures.push(format!("{id} appears in two tuning sets"));
            }
        }
    }
    if seen.len() != 63 {
        failures.push(format!("tuning sets cover {} of 63 ids", seen.len()));
    }

    let videos: Vec<LabeledStream> = roster
        .iter()
        .map(|l| LabeledStream {
            stream: generate(&l.scenario).expect("scenario").stream,
            collision: l.collision,
            agitation: l.agitation,
        })
        .collect();
    let deviation = match tune(&videos, &grid, &DetectorParams::default(), DEFAULT_SEED, false) {
        Ok(report) => {
            if report.evaluations.len() != 81 {
                failures.push(format!("{} tuning evaluations", report.evaluations.len()));
            }
            report.cross_fold_deviation
        }
        Err(e) => {
            failures.push(format!("tuning failed: {e}"));
            None
        }
    };
    match deviation {
        Some(d) if d <= TUNING_DEVIATION_BOUND => {}
        other => failures.push(format!("cross-fold deviation {other:?}")),
    }
    outcome(
        failures.is_empty(),
        format!(
            "27 configs, 3x21 disjoint tuning sets, cross-fold deviation {deviation:?}{}",
            first(&failures)
        ),
    )
}

// ---------------------------------------------------------------- 8

fn aura(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_aura"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!(
            "aura {}: {}",
            args.join(" "),
            String::from_utf8_lossy(&out.stderr).trim()
        ))
    }
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d)
            .expect("readable")
            .map(|e| e.expect("entry").path())
        {
            if e.is_dir() {
                stack.push(e);
            } else {
                let key = e.strip_prefix(dir).expect("inside").display().to_string();
                out.insert(key, std::fs::read(&e).expect("readable"));
            }
        }
    }
    out
}

/// Runs every verb in a fresh directory and returns every file produced.
fn run_all_commands(dir: &Path) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let p = |name: &str| dir.join(name).display().to_string();
    std::fs::write(
        dir.join("ratings.csv"),
        "subject,r1,r2,r3\ns1,9,2,5\ns2,6,1,3\ns3,8,4,6\ns4,7,1,2\n",
    )
    .map_err(|e| e.to_string())?;
    aura(&[
        "simulate",
        "--kind",
        "reach",
        "--seed",
        "3",
        "--output",
        &p("reach.jsonl"),
    ])?;
    aura(&["simulate", "--roster", "12", "--seed", "7", "--output", &p("roster")])?;
    aura(&[
        "detect",
        "--input",
        &p("reach.jsonl"),
        "--output",
        &p("events.jsonl"),
        "--annotations",
        &p("ann.jsonl"),
    ])?;
    aura(&[
        "detect",
        "--input",
        &p("reach.jsonl"),
        "--output",
        &p("events_rel.jsonl"),
        "--mode",
        "relative",
        "--lambda",
        "2.0",
    ])?;
    aura(&[
        "annotate-only",
        "--input",
        &p("reach.jsonl"),
        "--output",
        &p("ann_only.jsonl"),
    ])?;
    aura(&["predict", "--streams", &p("roster"), "--output", &p("pred.csv")])?;
    aura(&[
        "evaluate",
        "--predictions",
        &p("pred.csv"),
        "--labels",
        &p("roster/labels.csv"),
        "--output",
        &p("eval.jsonl"),
        "--bootstrap",
        "200",
        "--seed",
        "9",
    ])?;
    aura(&[
        "tune",
        "--streams",
        &p("roster"),
        "--labels",
        &p("roster/labels.csv"),
        "--output",
        &p("tune.jsonl"),
        "--seed",
        "4",
    ])?;
    aura(&["icc", "--ratings", &p("ratings.csv"), "--output", &p("icc.jsonl")])?;
    Ok(snapshot(dir))
}

fn determinism() -> Outcome {
    let runs: Result<Vec<_>, String> = (0..2)
        .map(|_| {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            run_all_commands(dir.path())
        })
        .collect();
    match runs {
        Err(e) => outcome(false, e),
        Ok(r) => {
            let differing: Vec<&String> = r[0].keys().filter(|k| r[1].get(*k) != r[0].get(*k)).collect();
            let same_set = r[0].keys().eq(r[1].keys());
            outcome(
                differing.is_empty() && same_set,
                format!(
                    "{} output files from 9 invocations, {} differ between reruns",
                    r[0].len(),
                    differing.len()
                ),
            )
        }
    }
}

type Check = Box<dyn FnOnce() -> Outcome>;

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("1 score functions", Box::new(|| timed(SCORE_BUDGET, score_functions))),
        ("2 persistence", Box::new(|| timed(PERSISTENCE_BUDGET, persistence))),
        ("3 simulator oracle", Box::new(|| timed(ORACLE_BUDGET, oracle))),
        (
            "4 reported metric consistency",
            Box::new(|| timed(REPORTED_BUDGET, reported_metrics)),
        ),
        ("5 ICC", Box::new(|| timed(ICC_BUDGET, icc))),
        ("6 scale invariance", Box::new(|| timed(SCALE_BUDGET, scale_invariance))),
        ("7 tuning", Box::new(|| timed(TUNING_BUDGET, tuning))),
        ("8 CLI determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        println!(
            "[{}] criterion {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {} of 8 criteria passed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
