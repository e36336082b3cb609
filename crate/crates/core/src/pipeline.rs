//! Runs both detectors over a whole stream.

use alloc::vec::Vec;

use crate::agitation::{self, AgitationFrameResult, AgitationParams, AgitationWindow};
use crate::collision::{self, CollisionEvent, CollisionFrameResult, CollisionParams, CollisionTrack};
use crate::geometry::AuraMode;
use crate::{Error, KeypointStream};

/// Parameters for both detectors.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DetectorParams {
    pub collision: CollisionParams,
    pub agitation: AgitationParams,
}

impl DetectorParams {
    pub fn validate(&self) -> Result<(), Error> {
        self.collision.validate()?;
        self.agitation.validate()
    }

    /// Sets the visibility threshold used by both detectors.
    pub fn set_tau_valid(&mut self, tau_valid: f64) {
        self.collision.tau_valid = tau_valid;
        self.agitation.tau_valid = tau_valid;
    }

    pub fn with_mode(mut self, mode: AuraMode) -> Self {
        self.collision.mode = mode;
        self
    }
}

/// Per-frame results, confirmed events and video-level predictions.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub collision_frames: Vec<CollisionFrameResult>,
    pub events: Vec<CollisionEvent>,
    pub agitation_frames: Vec<AgitationFrameResult>,
    pub collision: bool,
    pub agitation: bool,
    /// Frames where relative mode fell back to a fixed radius.
    pub radius_fallback_frames: usize,
}

pub fn detect(stream: &KeypointStream, params: &DetectorParams) -> Result<Detection, Error> {
    params.validate()?;
    let header = stream.header();
    let mut track = CollisionTrack::new();
    let mut window = AgitationWindow::new();
    let mut collision_frames = Vec::with_capacity(stream.len());
    let mut agitation_frames = Vec::with_capacity(stream.len());
    for frame in stream.frames() {
        collision_frames.push(track.step(frame, header, &params.collision)?);
        agitation_frames.push(window.step(frame, &params.agitation)?);
    }
    let events = track.finish();
    let radius_fallback_frames = collision_frames
        .iter()
        .filter(|r| r.radii.mouth_fallback || r.radii.hand_fallback)
        .count();
    Ok(Detection {
        collision: collision::video_prediction(&events),
        agitation: agitation::video_prediction(&agitation_frames),
        collision_frames,
        events,
        agitation_frames,
        radius_fallback_frames,
    })
}
