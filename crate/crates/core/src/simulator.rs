//! Deterministic synthetic keypoint streams with known labels.
//!
//! A patient lies still in a fixed pose viewed from above. Each scenario kind
//! adds one behavior on top of the rest pose:
//!
//! | kind              | behavior                                           | collision | agitation |
//! |-------------------|----------------------------------------------------|-----------|-----------|
//! | `calm`            | rest pose plus bounded noise                       | no        | no        |
//! | `reach`           | one hand travels to the mouth and stays there      | yes       | no        |
//! | `restless`        | arms and legs circle at a constant speed           | no        | yes       |
//! | `reach_then_calm` | reach, dwell, return, rest                         | yes       | no        |
//! | `staff_noise`     | low-visibility hand detections burst at the mouth  | no        | no        |
//!
//! `margin` is how decisively each scenario clears or avoids the default
//! thresholds: dwell time at the mouth exceeds `margin * tau_duration`, restless
//! transition velocities are at least `margin * tau_speed`, and every other
//! transition stays below `tau_speed / margin`. Coordinate noise is uniform on
//! `[-noise_amplitude, noise_amplitude]`, so these bounds hold for every frame.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::math::{round, sqrt};
use crate::{Error, KeypointFrame, KeypointStream, Landmark, LandmarkId, Side, StreamHeader};

/// Thresholds the margin guarantees are stated against.
const TAU_SPEED: f64 = 0.18;
const TAU_DURATION: f64 = 0.3;

/// Visibility range of ordinary detections, above every threshold the tuning
/// grid visits (at most 0.77).
const VISIBLE: (f64, f64) = (0.9, 1.0);
/// Visibility of spurious detections, below every threshold the grid visits
/// (at least 0.63).
const SPURIOUS_VISIBILITY: f64 = 0.35;

/// Smallest circle radius used by restless limbs, normalized units.
const CIRCLE_RADIUS: f64 = 0.03;
/// Largest radius that keeps a circling hand clear of the mouth aura.
const MAX_CIRCLE_RADIUS: f64 = 0.06;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ScenarioKind {
    Calm,
    Reach,
    Restless,
    ReachThenCalm,
    StaffNoise,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 5] = [
        ScenarioKind::Calm,
        ScenarioKind::Reach,
        ScenarioKind::Restless,
        ScenarioKind::ReachThenCalm,
        ScenarioKind::StaffNoise,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioKind::Calm => "calm",
            ScenarioKind::Reach => "reach",
            ScenarioKind::Restless => "restless",
            ScenarioKind::ReachThenCalm => "reach_then_calm",
            ScenarioKind::StaffNoise => "staff_noise",
        }
    }

    /// `(collision, agitation)` reference labels.
    pub fn expected_labels(self) -> (bool, bool) {
        match self {
            ScenarioKind::Calm | ScenarioKind::StaffNoise => (false, false),
            ScenarioKind::Reach | ScenarioKind::ReachThenCalm => (true, false),
            ScenarioKind::Restless => (false, true),
        }
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "kind",
                reason: format!("unknown scenario kind `{s}`"),
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: ScenarioKind,
    pub video_id: String,
    pub duration_s: f64,
    pub fps: f64,
    pub width_px: u32,
    pub height_px: u32,
    pub seed: u64,
    pub noise_amplitude: f64,
    pub margin: f64,
}

impl Scenario {
    /// 6 s at 25 fps, 1280x720, margin 2.
    pub fn new(kind: ScenarioKind, seed: u64) -> Self {
        Self {
            kind,
            video_id: format!("{kind}-{seed}"),
            duration_s: 6.0,
            fps: 25.0,
            width_px: 1280,
            height_px: 720,
            seed,
            noise_amplitude: 3e-4,
            margin: 2.0,
        }
    }

    pub fn frame_count(&self) -> usize {
        round(self.duration_s * self.fps) as usize
    }
}

/// A generated stream with its reference labels.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedScenario {
    pub stream: KeypointStream,
    pub expected_collision: bool,
    pub expected_agitation: bool,
}

type Pos = (f64, f64);

fn rest_pose() -> Vec<(LandmarkId, Pos)> {
    use LandmarkId::*;
    let mut pose = alloc::vec![
        (Nose, (0.50, 0.27)),
        (EyeLeft, (0.48, 0.245)),
        (EyeRight, (0.52, 0.245)),
        (EarLeft, (0.46, 0.26)),
        (EarRight, (0.54, 0.26)),
        (EyebrowLeft, (0.48, 0.23)),
        (EyebrowRight, (0.52, 0.23)),
        (MouthLeft, (0.49, 0.30)),
        (MouthRight, (0.51, 0.30)),
        (ShoulderLeft, (0.40, 0.42)),
        (ShoulderRight, (0.60, 0.42)),
        (ElbowLeft, (0.33, 0.58)),
        (ElbowRight, (0.67, 0.58)),
        (HipLeft, (0.44, 0.80)),
        (HipRight, (0.56, 0.80)),
        (KneeLeft, (0.45, 0.90)),
        (KneeRight, (0.55, 0.90)),
        (AnkleLeft, (0.45, 0.98)),
        (AnkleRight, (0.55, 0.98)),
    ];
    for side in Side::BOTH {
        let wrist = wrist_rest(side);
        for (id, off) in LandmarkId::hand(side).iter().zip(hand_offsets(side)) {
            pose.push((*id, (wrist.0 + off.0, wrist.1 + off.1)));
        }
    }
    pose
}

fn mirror(side: Side, x: f64) -> f64 {
    match side {
        Side::Left => x,
        Side::Right => -x,
    }
}

fn wrist_rest(side: Side) -> Pos {
    (0.5 + mirror(side, -0.20), 0.75)
}

fn elbow_id(side: Side) -> LandmarkId {
    match side {
        Side::Left => LandmarkId::ElbowLeft,
        Side::Right => LandmarkId::ElbowRight,
    }
}

/// Offsets of wrist, index, pinky, thumb from the wrist.
fn hand_offsets(side: Side) -> [Pos; 4] {
    [
        (0.0, 0.0),
        (mirror(side, 0.012), 0.045),
        (mirror(side, 0.028), 0.035),
        (mirror(side, -0.012), 0.030),
    ]
}

fn hand_center_offset(side: Side) -> Pos {
    let offs = hand_offsets(side);
    let sx: f64 = offs.iter().map(|o| o.0).sum();
    let sy: f64 = offs.iter().map(|o| o.1).sum();
    (sx / 4.0, sy / 4.0)
}

fn mouth_center() -> Pos {
    (0.50, 0.30)
}

fn lerp(a: Pos, b: Pos, s: f64) -> Pos {
    (a.0 + (b.0 - a.0) * s, a.1 + (b.1 - a.1) * s)
}

fn norm(a: Pos, b: Pos) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    sqrt(dx * dx + dy * dy)
}

/// Piecewise-linear reach profile: fraction of the way to the mouth at time t.
#[derive(Debug, Clone, Copy)]
struct ReachPlan {
    side: Side,
    start_s: f64,
    move_s: f64,
    dwell_s: f64,
    /// `None` for a hand that stays at the mouth until the end.
    return_s: Option<f64>,
}

impl ReachPlan {
    fn progress(&self, t: f64) -> f64 {
        let arrive = self.start_s + self.move_s;
        let leave = arrive + self.dwell_s;
        if t <= self.start_s {
            0.0
        } else if t < arrive {
            (t - self.start_s) / self.move_s
        } else if t <= leave {
            1.0
        } else {
            match self.return_s {
                None => 1.0,
                Some(r) if t < leave + r => 1.0 - (t - leave) / r,
                Some(_) => 0.0,
            }
        }
    }

    fn wrist_target(&self) -> Pos {
        let c = hand_center_offset(self.side);
        let m = mouth_center();
        (m.0 - c.0, m.1 - c.1)
    }

    /// Fastest speed of the wrist, normalized units per second.
    fn wrist_speed(&self) -> f64 {
        let d = norm(wrist_rest(self.side), self.wrist_target());
        let slowest_leg = self.return_s.map_or(self.move_s, |r| r.min(self.move_s));
        d / slowest_leg
    }
}

#[derive(Debug, Clone, Copy)]
struct CirclePlan {
    radius: f64,
    /// Radians per frame.
    step: f64,
    /// Phase of left arm, right arm, left leg, right leg.
    phases: [f64; 4],
}

enum Behavior {
    Still,
    Reach(ReachPlan),
    Circle(CirclePlan),
    Burst { side: Side, from_s: f64, to_s: f64 },
}

fn construction(msg: String) -> Error {
    Error::Construction(msg)
}

fn validate(s: &Scenario) -> Result<(), Error> {
    if !(s.duration_s > 0.0 && s.duration_s.is_finite()) {
        return Err(construction(format!("duration must be positive, got {}", s.duration_s)));
    }
    if !(s.fps > 0.0 && s.fps.is_finite()) {
        return Err(construction(format!("fps must be positive, got {}", s.fps)));
    }
    if !(s.margin >= 1.0 && s.margin.is_finite()) {
        return Err(construction(format!("margin must be at least 1, got {}", s.margin)));
    }
    if !(s.noise_amplitude >= 0.0 && s.noise_amplitude.is_finite()) {
        return Err(construction(format!(
            "noise amplitude must be non-negative, got {}",
            s.noise_amplitude
        )));
    }
    if s.width_px == 0 || s.height_px == 0 {
        return Err(construction("frame size must be positive".into()));
    }
    if s.frame_count() < 2 {
        return Err(construction("scenario yields fewer than two frames".into()));
    }
    Ok(())
}

/// Largest per-landmark speed that coordinate noise alone can produce.
fn noise_speed(s: &Scenario) -> f64 {
    2.0 * sqrt(3.0) * s.noise_amplitude * s.fps
}

fn plan(s: &Scenario, rng: &mut ChaCha8Rng, n_landmarks: usize) -> Result<Behavior, Error> {
    let quiet_ceiling = TAU_SPEED / s.margin;
    let noise = noise_speed(s);
    if noise >= quiet_ceiling {
        return Err(construction(format!(
            "noise amplitude {} allows speeds up to {noise:.4}/s, not below tau_speed / margin = {quiet_ceiling:.4}/s",
            s.noise_amplitude
        )));
    }
    let d = s.duration_s;
    let side = if rng.random_bool(0.5) { Side::Left } else { Side::Right };
    let n = n_landmarks as f64;
    let behavior = match s.kind {
        ScenarioKind::Calm => Behavior::Still,
        ScenarioKind::StaffNoise => Behavior::Burst {
            side,
            from_s: 0.3 * d,
            to_s: 0.6 * d,
        },
        ScenarioKind::Reach | ScenarioKind::ReachThenCalm => {
            let plan = if s.kind == ScenarioKind::Reach {
                ReachPlan {
                    side,
                    start_s: 0.10 * d,
                    move_s: 0.35 * d,
                    dwell_s: 0.55 * d,
                    return_s: None,
                }
            } else {
                ReachPlan {
                    side,
                    start_s: 0.05 * d,
                    move_s: 0.30 * d,
                    dwell_s: 0.25 * d,
                    return_s: Some(0.30 * d),
                }
            };
            let needed = s.margin * TAU_DURATION;
            if plan.dwell_s <= needed {
                return Err(construction(format!(
                    "dwell {:.3} s does not exceed margin * tau_duration = {needed:.3} s",
                    plan.dwell_s
                )));
            }
            // four hand landmarks at full speed, the elbow at half
            let moving = 4.5 * plan.wrist_speed() / n;
            if moving + noise >= quiet_ceiling {
                return Err(construction(format!(
                    "reach of {d} s moves too fast to stay below tau_speed / margin"
                )));
            }
            Behavior::Reach(plan)
        }
        ScenarioKind::Restless => {
            // elbows, hands and lower legs circle; the rest only jitters
            let moving = 14.0;
            let speed = s.margin * TAU_SPEED * n / moving + noise;
            let chord = speed / s.fps;
            let radius = CIRCLE_RADIUS.max(chord);
            if radius > MAX_CIRCLE_RADIUS {
                return Err(construction(format!(
                    "restless speed {speed:.3}/s needs a circle wider than {MAX_CIRCLE_RADIUS} at {} fps",
                    s.fps
                )));
            }
            let step = 2.0 * libm::asin(chord / (2.0 * radius));
            let mut phases = [0.0; 4];
            for p in &mut phases {
                *p = rng.random_range(0.0..core::f64::consts::TAU);
            }
            Behavior::Circle(CirclePlan { radius, step, phases })
        }
    };
    Ok(behavior)
}

fn limb_group(id: LandmarkId) -> Option<usize> {
    use LandmarkId::*;
    match id {
        ElbowLeft | WristLeft | IndexLeft | PinkyLeft | ThumbLeft => Some(0),
        ElbowRight | WristRight | IndexRight | PinkyRight | ThumbRight => Some(1),
        KneeLeft | AnkleLeft => Some(2),
        KneeRight | AnkleRight => Some(3),
        _ => None,
    }
}

fn hand_side(id: LandmarkId) -> Option<Side> {
    Side::BOTH.into_iter().find(|&s| LandmarkId::hand(s).contains(&id))
}

/// Noise-free position and visibility override for one landmark.
fn place(behavior: &Behavior, id: LandmarkId, rest: Pos, frame: usize, t: f64) -> (Pos, Option<f64>) {
    match behavior {
        Behavior::Still => (rest, None),
        Behavior::Reach(plan) => {
            let s = plan.progress(t);
            let wrist = wrist_rest(plan.side);
            let target = plan.wrist_target();
            let shift = (target.0 - wrist.0, target.1 - wrist.1);
            if hand_side(id) == Some(plan.side) {
                ((rest.0 + shift.0 * s, rest.1 + shift.1 * s), None)
            } else if id == elbow_id(plan.side) {
                (lerp(rest, (rest.0 + shift.0 * 0.5, rest.1 + shift.1 * 0.5), s), None)
            } else {
                (rest, None)
            }
        }
        Behavior::Circle(c) => match limb_group(id) {
            Some(g) => {
                let a = c.phases[g] + c.step * frame as f64;
                let p0 = c.phases[g];
                (
                    (
                        rest.0 + c.radius * (libm::cos(a) - libm::cos(p0)),
                        rest.1 + c.radius * (libm::sin(a) - libm::sin(p0)),
                    ),
                    None,
                )
            }
            None => (rest, None),
        },
        Behavior::Burst { side, from_s, to_s } => {
            if hand_side(id) == Some(*side) && t >= *from_s && t < *to_s {
                let c = hand_center_offset(*side);
                let m = mouth_center();
                let wrist = wrist_rest(*side);
                let off = (rest.0 - wrist.0, rest.1 - wrist.1);
                ((m.0 - c.0 + off.0, m.1 - c.1 + off.1), Some(SPURIOUS_VISIBILITY))
            } else {
                (rest, None)
            }
        }
    }
}

/// Builds the stream for `scenario`. Identical scenarios give identical streams.
pub fn generate(scenario: &Scenario) -> Result<GeneratedScenario, Error> {
    validate(scenario)?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed);
    let pose = rest_pose();
    let behavior = plan(scenario, &mut rng, pose.len())?;
    let a = scenario.noise_amplitude;
    let jitter = |rng: &mut ChaCha8Rng| if a > 0.0 { rng.random_range(-a..=a) } else { 0.0 };

    let frames = (0..scenario.frame_count())
        .map(|i| {
            let t = i as f64 / scenario.fps;
            let mut frame = KeypointFrame::new(i as u64, t);
            for &(id, rest) in &pose {
                let ((x, y), vis) = place(&behavior, id, rest, i, t);
                let lm = Landmark::new(
                    x + jitter(&mut rng),
                    y + jitter(&mut rng),
                    jitter(&mut rng),
                    vis.unwrap_or_else(|| rng.random_range(VISIBLE.0..=VISIBLE.1)),
                );
                frame.landmarks.insert(id, lm);
            }
            frame
        })
        .collect();

    let header = StreamHeader::new(
        scenario.video_id.clone(),
        scenario.fps,
        scenario.width_px,
        scenario.height_px,
    );
    let (expected_collision, expected_agitation) = scenario.kind.expected_labels();
    Ok(GeneratedScenario {
        stream: KeypointStream::new(header, frames)?,
        expected_collision,
        expected_agitation,
    })
}

/// Proportions of each scenario kind in a roster, in [`ScenarioKind::ALL`]
/// order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioMix([f64; 5]);

impl ScenarioMix {
    pub fn new(proportions: [f64; 5]) -> Result<Self, Error> {
        let sum: f64 = proportions.iter().sum();
        if proportions.iter().any(|p| p.is_nan() || *p < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter {
                name: "mix",
                reason: format!("proportions must be non-negative and sum to 1, got {sum}"),
            });
        }
        Ok(Self(proportions))
    }

    /// Label prevalence of the 63-video reference set: 24 collision-positive
    /// (reach 12, reach-then-calm 12), 23 agitation-positive (restless), and
    /// 16 negatives split between calm and staff noise.
    pub fn reference() -> Self {
        Self([8.0 / 63.0, 12.0 / 63.0, 23.0 / 63.0, 12.0 / 63.0, 8.0 / 63.0])
    }

    pub fn only(kind: ScenarioKind) -> Self {
        let mut p = [0.0; 5];
        p[kind as usize] = 1.0;
        Self(p)
    }

    pub fn proportion(&self, kind: ScenarioKind) -> f64 {
        self.0[kind as usize]
    }

    /// Largest-remainder apportionment of `n` scenarios.
    pub fn counts(&self, n: usize) -> [usize; 5] {
        let quotas = self.0.map(|p| p * n as f64);
        let mut counts = quotas.map(|q| libm::floor(q + 1e-9) as usize);
        let mut left = n - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..5).collect();
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - counts[a] as f64;
            let rb = quotas[b] - counts[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for i in order {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
    }
}

/// A roster entry.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledScenario {
    pub scenario: Scenario,
    pub collision: bool,
    pub agitation: bool,
}

/// Deterministic roster of `n` default scenarios with the given kind mix, in
/// seeded shuffled order. Video ids are `sim_000`, `sim_001`, ...
pub fn label_set(n: usize, mix: &ScenarioMix, seed: u64) -> Vec<LabeledScenario> {
    let counts = mix.counts(n);
    let mut kinds: Vec<ScenarioKind> = ScenarioKind::ALL
        .iter()
        .zip(counts)
        .flat_map(|(&k, c)| core::iter::repeat_n(k, c))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kinds.shuffle(&mut rng);
    kinds
        .into_iter()
        .enumerate()
        .map(|(i, kind)| {
            let mut scenario = Scenario::new(kind, seed.wrapping_mul(1_000_003).wrapping_add(i as u64));
            scenario.video_id = format!("sim_{i:03}");
            let (collision, agitation) = kind.expected_labels();
            LabeledScenario {
                scenario,
                collision,
                agitation,
            }
        })
        .collect()
}
