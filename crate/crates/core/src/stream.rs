//! Stream header, frames and stream-level validation.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::geometry::Point2;
use crate::{Error, Landmark, LandmarkId};

/// Per-stream metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct StreamHeader {
    pub video_id: String,
    pub fps: f64,
    pub width_px: u32,
    pub height_px: u32,
}

impl StreamHeader {
    pub fn new(video_id: impl Into<String>, fps: f64, width_px: u32, height_px: u32) -> Self {
        Self {
            video_id: video_id.into(),
            fps,
            width_px,
            height_px,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.fps.is_finite() && self.fps > 0.0) {
            return Err(Error::InvalidHeader(alloc::format!(
                "fps must be positive, got {}",
                self.fps
            )));
        }
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::InvalidHeader(alloc::format!(
                "frame size must be positive, got {}x{}",
                self.width_px,
                self.height_px
            )));
        }
        Ok(())
    }

    /// Nominal time between frames.
    pub fn frame_interval_s(&self) -> f64 {
        1.0 / self.fps
    }

    /// Converts a normalized landmark position into pixel coordinates.
    pub fn to_pixels(&self, lm: &Landmark) -> Point2 {
        to_pixels(lm, self)
    }
}

/// `(x * width_px, y * height_px)`.
pub fn to_pixels(lm: &Landmark, header: &StreamHeader) -> Point2 {
    Point2::new(lm.x * f64::from(header.width_px), lm.y * f64::from(header.height_px))
}

/// One timestamped frame. Missing landmarks are simply absent from the map.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct KeypointFrame {
    pub index: u64,
    pub timestamp_s: f64,
    pub landmarks: BTreeMap<LandmarkId, Landmark>,
}

impl KeypointFrame {
    pub fn new(index: u64, timestamp_s: f64) -> Self {
        Self {
            index,
            timestamp_s,
            landmarks: BTreeMap::new(),
        }
    }

    pub fn with(mut self, id: LandmarkId, lm: Landmark) -> Self {
        self.landmarks.insert(id, lm);
        self
    }

    pub fn get(&self, id: LandmarkId) -> Option<&Landmark> {
        self.landmarks.get(&id)
    }

    /// The landmark if present and passing the visibility gate.
    pub fn valid(&self, id: LandmarkId, tau_valid: f64) -> Option<&Landmark> {
        self.landmarks.get(&id).filter(|lm| lm.is_valid(tau_valid))
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !self.timestamp_s.is_finite() || self.timestamp_s < 0.0 {
            return Err(Error::NonMonotoneTimestamp {
                index: self.index,
                timestamp_s: self.timestamp_s,
                previous_s: 0.0,
            });
        }
        for (id, lm) in &self.landmarks {
            lm.check().map_err(|reason| Error::InvalidLandmark {
                index: self.index,
                landmark: id.as_str(),
                reason,
            })?;
        }
        Ok(())
    }
}

/// A validated header plus its frames in stream order.
#[derive(Debug, Clone, PartialEq)]
pub struct KeypointStream {
    header: StreamHeader,
    frames: Vec<KeypointFrame>,
}

impl KeypointStream {
    /// Builds a stream, checking header, landmark and ordering invariants.
    pub fn new(header: StreamHeader, frames: Vec<KeypointFrame>) -> Result<Self, Error> {
        header.validate()?;
        let mut previous: Option<&KeypointFrame> = None;
        for frame in &frames {
            frame.validate()?;
            if let Some(prev) = previous {
                check_order(prev, frame)?;
            }
            previous = Some(frame);
        }
        Ok(Self { header, frames })
    }

    pub fn header(&self) -> &StreamHeader {
        &self.header
    }

    pub fn frames(&self) -> &[KeypointFrame] {
        &self.frames
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Nominal duration: frame count divided by frame rate.
    pub fn duration_s(&self) -> f64 {
        self.frames.len() as f64 / self.header.fps
    }

    /// Same frames under a different header (e.g. another resolution).
    pub fn with_header(&self, header: StreamHeader) -> Result<Self, Error> {
        header.validate()?;
        Ok(Self {
            header,
            frames: self.frames.clone(),
        })
    }

    pub fn into_parts(self) -> (StreamHeader, Vec<KeypointFrame>) {
        (self.header, self.frames)
    }
}

pub fn check_order(prev: &KeypointFrame, next: &KeypointFrame) -> Result<(), Error> {
    if next.index <= prev.index {
        return Err(Error::NonMonotoneIndex {
            index: next.index,
            previous: prev.index,
        });
    }
    if next.timestamp_s < prev.timestamp_s {
        return Err(Error::NonMonotoneTimestamp {
            index: next.index,
            timestamp_s: next.timestamp_s,
            previous_s: prev.timestamp_s,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn header() -> StreamHeader {
        StreamHeader::new("v", 25.0, 1280, 720)
    }

    #[test]
    fn empty_stream() {
        let s = KeypointStream::new(header(), vec![]).unwrap();
        assert!(s.is_empty());
        assert_eq!(s.duration_s(), 0.0);
    }

    #[test]
    fn duration_of_150_frames_at_25_fps() {
        let frames = (0..150).map(|i| KeypointFrame::new(i, i as f64 / 25.0)).collect();
        let s = KeypointStream::new(header(), frames).unwrap();
        assert_eq!(s.duration_s(), 6.0);
    }

    #[test]
    fn rejects_backwards_timestamp() {
        let frames = vec![KeypointFrame::new(0, 0.08), KeypointFrame::new(1, 0.04)];
        assert!(matches!(
            KeypointStream::new(header(), frames),
            Err(Error::NonMonotoneTimestamp { index: 1, .. })
        ));
    }

    #[test]
    fn rejects_repeated_index() {
        let frames = vec![KeypointFrame::new(3, 0.0), KeypointFrame::new(3, 0.04)];
        assert!(matches!(
            KeypointStream::new(header(), frames),
            Err(Error::NonMonotoneIndex { index: 3, previous: 3 })
        ));
    }

    #[test]
    fn rejects_bad_header() {
        let bad = StreamHeader::new("v", 0.0, 1280, 720);
        assert!(KeypointStream::new(bad, vec![]).is_err());
        let bad = StreamHeader::new("v", 25.0, 0, 720);
        assert!(KeypointStream::new(bad, vec![]).is_err());
    }

    #[test]
    fn rejects_bad_visibility() {
        let f = KeypointFrame::new(0, 0.0).with(LandmarkId::Nose, Landmark::new(0.5, 0.5, 0.0, 1.5));
        assert!(matches!(
            KeypointStream::new(header(), vec![f]),
            Err(Error::InvalidLandmark { landmark: "nose", .. })
        ));
    }

    #[test]
    fn pixel_conversion() {
        let h = header();
        let p = to_pixels(&Landmark::new(0.5, 0.5, 0.0, 1.0), &h);
        assert_eq!((p.x, p.y), (640.0, 360.0));
        let p = to_pixels(&Landmark::new(0.0, 0.0, 0.0, 1.0), &h);
        assert_eq!((p.x, p.y), (0.0, 0.0));
        let small = StreamHeader::new("v", 25.0, 854, 480);
        let p = small.to_pixels(&Landmark::new(1.0, 1.0, 0.0, 1.0));
        assert_eq!((p.x, p.y), (854.0, 480.0));
    }

    proptest! {
        #[test]
        fn pixel_conversion_is_linear(x in -1.0..2.0f64, y in -1.0..2.0f64, w in 1u32..4000, h in 1u32..4000) {
            let lm = Landmark::new(x, y, 0.0, 1.0);
            let one = to_pixels(&lm, &StreamHeader::new("v", 25.0, w, h));
            let two = to_pixels(&lm, &StreamHeader::new("v", 25.0, 2 * w, 2 * h));
            prop_assert_eq!(two.x, 2.0 * one.x);
            prop_assert_eq!(two.y, 2.0 * one.y);
        }

        #[test]
        fn visibility_gate_monotone(v1 in 0.0..=1.0f64, v2 in 0.0..=1.0f64, t1 in 0.0..=1.0f64, t2 in 0.0..=1.0f64) {
            let (lo_v, hi_v) = if v1 <= v2 { (v1, v2) } else { (v2, v1) };
            let (lo_t, hi_t) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let lm = |v| Landmark::new(0.0, 0.0, 0.0, v);
            // monotone in visibility
            prop_assert!(!lm(lo_v).is_valid(t1) || lm(hi_v).is_valid(t1));
            // antitone in threshold
            prop_assert!(!lm(v1).is_valid(hi_t) || lm(v1).is_valid(lo_t));
        }
    }
}
