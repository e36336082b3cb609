//! Collision scoring and persistence-confirmed collision tracking.
//!
//! Each frame, for each hand with usable anchors:
//!
//! ```text
//! overlap   = max(0, 1 - d_2d / (r_h + r_m))      pixels
//! proximity = max(0, 1 - d_3d / tau_base)         normalized units
//! score     = alpha * overlap + beta * proximity
//! risk      = score > tau_score
//! ```
//!
//! A hand's risk interval opens on its first risk frame and closes on the first
//! frame without risk. The interval confirms a [`CollisionEvent`] once the time
//! since onset exceeds `tau_duration`; an interval confirms at most once.

use alloc::vec::Vec;

use crate::geometry::{anchors, aura_radii, dist_2d, dist_3d, hand_size, head_size, AnchorSet, AuraMode, AuraRadii};
use crate::{Error, KeypointFrame, Side, StreamHeader};

/// Slack on the duration comparison so that an interval whose exact length is
/// `tau_duration` does not confirm through timestamp rounding.
const DURATION_SLACK_S: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionParams {
    /// 3D distance threshold, normalized units.
    pub tau_base: f64,
    /// Weight of the 2D overlap score.
    pub alpha: f64,
    /// Weight of the 3D proximity score.
    pub beta: f64,
    pub tau_score: f64,
    /// Seconds the risk state must persist before a collision is confirmed.
    pub tau_duration: f64,
    pub tau_valid: f64,
    pub mode: AuraMode,
    /// Base mouth aura radius, pixels.
    pub r_m_base: f64,
    /// Base hand aura radius, pixels.
    pub r_h_base: f64,
}

impl Default for CollisionParams {
    fn default() -> Self {
        Self {
            tau_base: 0.3,
            alpha: 0.7,
            beta: 0.3,
            tau_score: 0.3,
            tau_duration: 0.3,
            tau_valid: 0.7,
            mode: AuraMode::default(),
            r_m_base: 150.0,
            r_h_base: 100.0,
        }
    }
}

fn invalid(name: &'static str, reason: &str) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

impl CollisionParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.alpha >= 0.0 && self.beta >= 0.0 && self.alpha + self.beta > 0.0) {
            return Err(invalid("alpha", "weights must be non-negative with a positive sum"));
        }
        if !(self.tau_base > 0.0 && self.tau_base.is_finite()) {
            return Err(invalid("tau_base", "must be positive"));
        }
        if !(self.tau_score > 0.0 && self.tau_score <= 1.0) {
            return Err(invalid("tau_score", "must lie in (0, 1]"));
        }
        if !(self.tau_duration >= 0.0 && self.tau_duration.is_finite()) {
            return Err(invalid("tau_duration", "must be non-negative"));
        }
        if !(0.0..=1.0).contains(&self.tau_valid) {
            return Err(invalid("tau_valid", "must lie in [0, 1]"));
        }
        if !(self.r_m_base > 0.0 && self.r_m_base.is_finite()) {
            return Err(invalid("r_m", "must be positive"));
        }
        if !(self.r_h_base > 0.0 && self.r_h_base.is_finite()) {
            return Err(invalid("r_h", "must be positive"));
        }
        self.mode.validate()
    }
}

/// `max(0, 1 - d_2d / (r_h + r_m))`.
pub fn overlap_score(d_2d: f64, r_h: f64, r_m: f64) -> f64 {
    (1.0 - d_2d / (r_h + r_m)).max(0.0)
}

/// `max(0, 1 - d_3d / tau_base)`.
pub fn proximity_score(d_3d: f64, tau_base: f64) -> f64 {
    (1.0 - d_3d / tau_base).max(0.0)
}

pub fn collision_score(overlap: f64, proximity: f64, alpha: f64, beta: f64) -> f64 {
    alpha * overlap + beta * proximity
}

/// Scores for one hand in one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HandResult {
    pub side: Side,
    /// Mouth and this hand's anchors were both available.
    pub anchors_available: bool,
    pub overlap: f64,
    pub proximity: f64,
    pub score: f64,
    pub risk: bool,
    /// The hand is inside a confirmed risk interval after this frame.
    pub confirmed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollisionFrameResult {
    pub index: u64,
    pub timestamp_s: f64,
    pub anchors: AnchorSet,
    pub radii: AuraRadii,
    /// Left then right.
    pub hands: [HandResult; 2],
}

impl CollisionFrameResult {
    pub fn hand(&self, side: Side) -> &HandResult {
        &self.hands[side_slot(side)]
    }
}

/// A confirmed collision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollisionEvent {
    pub side: Side,
    /// Timestamp of the first risk frame of the interval.
    pub onset_s: f64,
    /// Timestamp of the frame at which the interval exceeded `tau_duration`.
    pub confirmed_s: f64,
    /// Timestamp of the first frame without risk, or of the last frame when
    /// the stream ended inside the interval.
    pub end_s: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct HandTrack {
    risk_since: Option<f64>,
    confirmed: bool,
    open_event: Option<usize>,
}

fn side_slot(side: Side) -> usize {
    match side {
        Side::Left => 0,
        Side::Right => 1,
    }
}

/// Per-stream collision state. Frames must be applied in stream order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CollisionTrack {
    hands: [HandTrack; 2],
    events: Vec<CollisionEvent>,
    last: Option<(u64, f64)>,
}

impl CollisionTrack {
    pub fn new() -> Self {
        Self::default()
    }

    /// Onset of the current risk interval for `side`, if the hand is at risk.
    pub fn risk_since(&self, side: Side) -> Option<f64> {
        self.hands[side_slot(side)].risk_since
    }

    pub fn is_confirmed(&self, side: Side) -> bool {
        self.hands[side_slot(side)].confirmed
    }

    /// Events emitted so far. Open events carry the latest frame as `end_s`.
    pub fn events(&self) -> &[CollisionEvent] {
        &self.events
    }

    /// Scores one frame and advances both hands' persistence state.
    pub fn step(
        &mut self,
        frame: &KeypointFrame,
        header: &StreamHeader,
        params: &CollisionParams,
    ) -> Result<CollisionFrameResult, Error> {
        if let Some((last_index, last_t)) = self.last {
            if frame.index <= last_index || frame.timestamp_s < last_t {
                return Err(Error::OutOfOrderFrame {
                    index: frame.index,
                    timestamp_s: frame.timestamp_s,
                    last_index,
                    last_timestamp_s: last_t,
                });
            }
        }
        self.last = Some((frame.index, frame.timestamp_s));

        let anchors = anchors(frame, header, params.tau_valid);
        let radii = aura_radii(
            &params.mode,
            params.r_m_base,
            params.r_h_base,
            head_size(frame, header, params.tau_valid),
            hand_size(frame, header, params.tau_valid),
        );
        let t = frame.timestamp_s;
        let hands = Side::BOTH.map(|side| {
            let mut result = score_hand(side, &anchors, &radii, params);
            result.confirmed = self.advance(side, result.risk, t, params.tau_duration);
            result
        });
        Ok(CollisionFrameResult {
            index: frame.index,
            timestamp_s: t,
            anchors,
            radii,
            hands,
        })
    }

    fn advance(&mut self, side: Side, risk: bool, t: f64, tau_duration: f64) -> bool {
        let hand = &mut self.hands[side_slot(side)];
        if !risk {
            if let Some(i) = hand.open_event.take() {
                self.events[i].end_s = t;
            }
            *hand = HandTrack::default();
            return false;
        }
        let onset = *hand.risk_since.get_or_insert(t);
        if let Some(i) = hand.open_event {
            self.events[i].end_s = t;
        } else if t - onset > tau_duration + DURATION_SLACK_S {
            hand.confirmed = true;
            hand.open_event = Some(self.events.len());
            self.events.push(CollisionEvent {
                side,
                onset_s: onset,
                confirmed_s: t,
                end_s: t,
            });
        }
        hand.confirmed
    }

    /// Closes any open interval and returns every confirmed event.
    pub fn finish(self) -> Vec<CollisionEvent> {
        self.events
    }
}

fn score_hand(side: Side, anchors: &AnchorSet, radii: &AuraRadii, params: &CollisionParams) -> HandResult {
    let zero = HandResult {
        side,
        anchors_available: false,
        overlap: 0.0,
        proximity: 0.0,
        score: 0.0,
        risk: false,
        confirmed: false,
    };
    let (Some((mouth, mouth_3d)), Some((hand, hand_3d))) = (anchors.mouth(), anchors.hand(side)) else {
        return zero;
    };
    let overlap = overlap_score(dist_2d(mouth, hand), radii.hand, radii.mouth);
    let proximity = proximity_score(dist_3d(mouth_3d, hand_3d), params.tau_base);
    let score = collision_score(overlap, proximity, params.alpha, params.beta);
    HandResult {
        anchors_available: true,
        overlap,
        proximity,
        score,
        risk: score > params.tau_score,
        ..zero
    }
}

/// A video is collision-positive iff it has at least one confirmed event.
pub fn video_prediction(events: &[CollisionEvent]) -> bool {
    !events.is_empty()
}
