//! Detection core for keypoint-stream airway-risk monitoring.
//!
//! The crate turns a stream of pose landmarks into two kinds of alarms:
//!
//! - **collision**: a hand aura overlapping the mouth aura (2D) combined with
//!   3D hand-to-mouth proximity, confirmed only after the risk state persists
//!   for longer than a minimum duration;
//! - **agitation**: high keypoint velocity over a short sliding window.
//!
//! It also carries the evaluation machinery used to score those alarms against
//! reference labels (confusion matrices, bootstrap intervals, ICC(3,k)) and the
//! parameter-robustness harness (fold plans and a ±10% grid search).
//!
//! The crate is `no_std` and needs only `alloc`. File formats, configuration
//! and the command-line tool live in `aura-engine`.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agitation;
pub mod collision;
mod error;
pub mod geometry;
pub mod landmark;
pub mod math;
pub mod metrics;
pub mod pipeline;
pub mod simulator;
pub mod stream;
pub mod tuning;

pub use error::Error;
pub use landmark::{Landmark, LandmarkId, Side};
pub use pipeline::{detect, Detection, DetectorParams};
pub use stream::{KeypointFrame, KeypointStream, StreamHeader};
