//! Event and annotation records written by `detect`.
//!
//! Numbers pass through [`sig6`] before serialization.

use aura_core::collision::CollisionFrameResult;
use aura_core::geometry::Point2;
use aura_core::{Detection, KeypointStream, Side};
use serde::Serialize;

use crate::error::{EngineError, Result};
use crate::output::{sig6, sig6_opt};

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum EventRecord {
    Collision {
        video_id: String,
        side: &'static str,
        onset_s: f64,
        confirmed_s: f64,
        end_s: f64,
    },
    AgitationWindow {
        video_id: String,
        index: u64,
        timestamp_s: f64,
        mean_velocity: f64,
        peak_velocity: f64,
        cumulative_velocity: f64,
        n_valid_transitions: usize,
        is_agitation: bool,
    },
    VideoSummary {
        video_id: String,
        n_frames: usize,
        duration_s: f64,
        collision: bool,
        agitation: bool,
        collision_events: usize,
        agitation_frames: usize,
        radius_fallback_frames: usize,
    },
}

/// Collision events in confirmation order, one agitation record per frame,
/// then the video summary.
///
/// Fails if an event timestamp falls outside the stream, which would mean the
/// detector itself is broken.
pub fn event_records(stream: &KeypointStream, det: &Detection) -> Result<Vec<EventRecord>> {
    let video_id = stream.header().video_id.clone();
    let last_t = stream.frames().last().map_or(0.0, |f| f.timestamp_s);
    let first_t = stream.frames().first().map_or(0.0, |f| f.timestamp_s);
    let mut out = Vec::with_capacity(det.events.len() + det.agitation_frames.len() + 1);
    for e in &det.events {
        let ordered = first_t <= e.onset_s && e.onset_s <= e.confirmed_s && e.confirmed_s <= e.end_s;
        if !(ordered && e.end_s <= last_t && e.onset_s >= 0.0) {
            return Err(EngineError::Internal(format!(
                "collision event {:?} lies outside [{first_t}, {last_t}]",
                e
            )));
        }
        out.push(EventRecord::Collision {
            video_id: video_id.clone(),
            side: e.side.as_str(),
            onset_s: sig6(e.onset_s),
            confirmed_s: sig6(e.confirmed_s),
            end_s: sig6(e.end_s),
        });
    }
    for a in &det.agitation_frames {
        out.push(EventRecord::AgitationWindow {
            video_id: video_id.clone(),
            index: a.index,
            timestamp_s: sig6(a.timestamp_s),
            mean_velocity: sig6(a.mean_velocity),
            peak_velocity: sig6(a.peak_velocity),
            cumulative_velocity: sig6(a.cumulative_velocity),
            n_valid_transitions: a.n_valid_transitions,
            is_agitation: a.is_agitation,
        });
    }
    out.push(EventRecord::VideoSummary {
        video_id,
        n_frames: stream.len(),
        duration_s: sig6(stream.duration_s()),
        collision: det.collision,
        agitation: det.agitation,
        collision_events: det.events.len(),
        agitation_frames: det.agitation_frames.iter().filter(|a| a.is_agitation).count(),
        radius_fallback_frames: det.radius_fallback_frames,
    });
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuraState {
    Normal,
    Collision,
}

impl AuraState {
    fn of(confirmed: bool) -> Self {
        if confirmed {
            AuraState::Collision
        } else {
            AuraState::Normal
        }
    }

    pub fn color(self) -> &'static str {
        match self {
            AuraState::Normal => "green",
            AuraState::Collision => "red",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuraOverlay {
    /// Pixels.
    pub center: [f64; 2],
    /// Pixels.
    pub radius: f64,
    pub state: AuraState,
    pub color: &'static str,
}

impl AuraOverlay {
    fn new(center: Point2, radius: f64, state: AuraState) -> Self {
        Self {
            center: [sig6(center.x), sig6(center.y)],
            radius: sig6(radius),
            state,
            color: state.color(),
        }
    }
}

/// Per-frame overlay data for an external renderer. An aura is `null` when
/// its anchor is not visible in the frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameAnnotation {
    pub index: u64,
    pub timestamp_s: f64,
    pub mouth: Option<AuraOverlay>,
    pub left_hand: Option<AuraOverlay>,
    pub right_hand: Option<AuraOverlay>,
    /// Left-hand collision score, `null` without anchors.
    pub lh: Option<f64>,
    pub rh: Option<f64>,
    /// Window mean velocity.
    pub vel: f64,
    pub agitation: bool,
}

fn hand_overlay(r: &CollisionFrameResult, side: Side) -> Option<AuraOverlay> {
    let center = match side {
        Side::Left => r.anchors.hand_center_left,
        Side::Right => r.anchors.hand_center_right,
    }?;
    Some(AuraOverlay::new(
        center,
        r.radii.hand,
        AuraState::of(r.hand(side).confirmed),
    ))
}

fn score(r: &CollisionFrameResult, side: Side) -> Option<f64> {
    let h = r.hand(side);
    h.anchors_available.then_some(h.score)
}

/// One annotation per frame. The mouth aura turns red while either hand is in
/// a confirmed interval.
pub fn annotations(det: &Detection) -> Vec<FrameAnnotation> {
    det.collision_frames
        .iter()
        .zip(&det.agitation_frames)
        .map(|(c, a)| {
            let any_confirmed = c.hands.iter().any(|h| h.confirmed);
            FrameAnnotation {
                index: c.index,
                timestamp_s: sig6(c.timestamp_s),
                mouth: c
                    .anchors
                    .mouth_center
                    .map(|m| AuraOverlay::new(m, c.radii.mouth, AuraState::of(any_confirmed))),
                left_hand: hand_overlay(c, Side::Left),
                right_hand: hand_overlay(c, Side::Right),
                lh: sig6_opt(score(c, Side::Left)),
                rh: sig6_opt(score(c, Side::Right)),
                vel: sig6(a.mean_velocity),
                agitation: a.is_agitation,
            }
        })
        .collect()
}
