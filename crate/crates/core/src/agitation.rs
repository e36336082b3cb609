//! Sliding-window keypoint velocity statistics and the agitation trigger.
//!
//! A landmark contributes a velocity to a frame transition only when it passes
//! the visibility gate in both frames. By default the per-landmark velocities of
//! one transition are averaged into a single aggregate, so a window of `w`
//! frames yields up to `w - 1` values `V`. Agitation fires when any of
//!
//! ```text
//! mean(V) > tau_speed,  max(V) > tau_speed,  sum(V) > tau_speed * w
//! ```
//!
//! holds. [`VelocityPooling::PerKeypoint`] instead pools every landmark
//! velocity of the window into `V`.

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use crate::math::sqrt;
use crate::stream::check_order;
use crate::{Error, KeypointFrame, Landmark, LandmarkId};

/// How landmark velocities are combined into the window sample `V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VelocityPooling {
    /// One mean velocity per frame transition.
    #[default]
    PerTransition,
    /// Every (landmark, transition) velocity.
    PerKeypoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgitationParams {
    /// Normalized units per second.
    pub tau_speed: f64,
    /// Window length in frames.
    pub window: usize,
    pub tau_valid: f64,
    /// Landmarks considered; `None` tracks every landmark in the stream.
    pub tracked: Option<BTreeSet<LandmarkId>>,
    pub pooling: VelocityPooling,
}

impl Default for AgitationParams {
    fn default() -> Self {
        Self {
            tau_speed: 0.18,
            window: 5,
            tau_valid: 0.7,
            tracked: None,
            pooling: VelocityPooling::PerTransition,
        }
    }
}

impl AgitationParams {
    pub fn validate(&self) -> Result<(), Error> {
        if self.window < 2 {
            return Err(Error::InvalidParameter {
                name: "w",
                reason: "window must hold at least 2 frames".into(),
            });
        }
        if !(self.tau_speed > 0.0 && self.tau_speed.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tau_speed",
                reason: "must be positive".into(),
            });
        }
        if !(0.0..=1.0).contains(&self.tau_valid) {
            return Err(Error::InvalidParameter {
                name: "tau_valid",
                reason: "must lie in [0, 1]".into(),
            });
        }
        Ok(())
    }

    fn tracks(&self, id: LandmarkId) -> bool {
        self.tracked.as_ref().is_none_or(|set| set.contains(&id))
    }
}

/// 3D displacement over `dt`.
pub fn keypoint_velocity(prev: &Landmark, curr: &Landmark, dt: f64) -> Result<f64, Error> {
    if dt.is_nan() || dt <= 0.0 {
        return Err(Error::NonPositiveTimeStep(dt));
    }
    let (dx, dy, dz) = (curr.x - prev.x, curr.y - prev.y, curr.z - prev.z);
    Ok(sqrt(dx * dx + dy * dy + dz * dz) / dt)
}

/// Velocities of the tracked landmarks valid in both frames. Empty when the
/// frames share a timestamp.
fn transition_velocities(prev: &KeypointFrame, curr: &KeypointFrame, params: &AgitationParams) -> Vec<f64> {
    let dt = curr.timestamp_s - prev.timestamp_s;
    if dt.is_nan() || dt <= 0.0 {
        return Vec::new();
    }
    curr.landmarks
        .iter()
        .filter(|(id, lm)| params.tracks(**id) && lm.is_valid(params.tau_valid))
        .filter_map(|(id, lm)| {
            let before = prev.valid(*id, params.tau_valid)?;
            keypoint_velocity(before, lm, dt).ok()
        })
        .collect()
}

fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Mean velocity over tracked landmarks valid in both frames; `None` if there
/// are none.
pub fn frame_aggregate_velocity(prev: &KeypointFrame, curr: &KeypointFrame, params: &AgitationParams) -> Option<f64> {
    mean(&transition_velocities(prev, curr, params))
}

/// Window statistics for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AgitationFrameResult {
    pub index: u64,
    pub timestamp_s: f64,
    pub mean_velocity: f64,
    pub peak_velocity: f64,
    pub cumulative_velocity: f64,
    pub n_valid_transitions: usize,
    pub is_agitation: bool,
}

/// The three statistics and the trigger over a window sample `V`.
pub fn window_statistics(values: &[f64], tau_speed: f64, window: usize) -> (f64, f64, f64, bool) {
    if values.is_empty() {
        return (0.0, 0.0, 0.0, false);
    }
    let cumulative: f64 = values.iter().sum();
    let mean = cumulative / values.len() as f64;
    let peak = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let fires = mean > tau_speed || peak > tau_speed || cumulative > tau_speed * window as f64;
    (mean, peak, cumulative, fires)
}

/// Ring buffer of the last `w` frames and the transitions between them.
#[derive(Debug, Clone, Default)]
pub struct AgitationWindow {
    frames: VecDeque<KeypointFrame>,
    /// `transitions[i]` holds velocities between `frames[i]` and `frames[i + 1]`.
    transitions: VecDeque<Vec<f64>>,
}

impl AgitationWindow {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Per-transition aggregate velocities currently in the window.
    pub fn aggregates(&self) -> impl Iterator<Item = Option<f64>> + '_ {
        self.transitions.iter().map(|v| mean(v))
    }

    /// Appends a frame, evicting the oldest once the window holds `w` frames.
    pub fn push(&mut self, frame: &KeypointFrame, params: &AgitationParams) -> Result<(), Error> {
        if let Some(last) = self.frames.back() {
            check_order(last, frame).map_err(|_| Error::OutOfOrderFrame {
                index: frame.index,
                timestamp_s: frame.timestamp_s,
                last_index: last.index,
                last_timestamp_s: last.timestamp_s,
            })?;
            self.transitions.push_back(transition_velocities(last, frame, params));
        }
        self.frames.push_back(frame.clone());
        while self.frames.len() > params.window.max(2) {
            self.frames.pop_front();
            self.transitions.pop_front();
        }
        Ok(())
    }

    /// Statistics over the current window. Fewer than two frames, or no valid
    /// transition, gives the all-zero non-agitation result.
    pub fn stats(&self, params: &AgitationParams) -> AgitationFrameResult {
        let (index, timestamp_s) = self.frames.back().map_or((0, 0.0), |f| (f.index, f.timestamp_s));
        let n_valid_transitions = self.transitions.iter().filter(|v| !v.is_empty()).count();
        let values: Vec<f64> = match params.pooling {
            VelocityPooling::PerTransition => self.aggregates().flatten().collect(),
            VelocityPooling::PerKeypoint => self.transitions.iter().flatten().copied().collect(),
        };
        let (mean_velocity, peak_velocity, cumulative_velocity, is_agitation) =
            window_statistics(&values, params.tau_speed, params.window);
        AgitationFrameResult {
            index,
            timestamp_s,
            mean_velocity,
            peak_velocity,
            cumulative_velocity,
            n_valid_transitions,
            is_agitation,
        }
    }

    pub fn step(&mut self, frame: &KeypointFrame, params: &AgitationParams) -> Result<AgitationFrameResult, Error> {
        self.push(frame, params)?;
        Ok(self.stats(params))
    }
}

/// Free-function form of [`AgitationWindow::stats`].
pub fn window_stats(window: &AgitationWindow, params: &AgitationParams) -> AgitationFrameResult {
    window.stats(params)
}

/// A video is agitation-positive iff any window fired.
pub fn video_prediction(results: &[AgitationFrameResult]) -> bool {
    results.iter().any(|r| r.is_agitation)
}
