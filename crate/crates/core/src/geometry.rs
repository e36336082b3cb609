//! Distances, anchor points, body-size estimates and aura radii.

use crate::math::sqrt;
use crate::stream::to_pixels;
use crate::{Error, KeypointFrame, Landmark, LandmarkId, Side, StreamHeader};

/// A point in pixel space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// A point in normalized 3D landmark space.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }
}

pub fn dist_2d(a: Point2, b: Point2) -> f64 {
    let (dx, dy) = (a.x - b.x, a.y - b.y);
    sqrt(dx * dx + dy * dy)
}

pub fn dist_3d(a: Point3, b: Point3) -> f64 {
    let (dx, dy, dz) = (a.x - b.x, a.y - b.y, a.z - b.z);
    sqrt(dx * dx + dy * dy + dz * dz)
}

/// Whether aura radii are calibrated pixel constants or follow body size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AuraVariant {
    #[default]
    Fixed,
    Relative,
}

/// Aura radius mode. `lambda` is only read in relative mode and `s_r` only in
/// fixed mode; both are kept so one configuration can switch modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuraMode {
    pub variant: AuraVariant,
    pub lambda: f64,
    pub s_r: f64,
}

impl Default for AuraMode {
    fn default() -> Self {
        Self {
            variant: AuraVariant::Fixed,
            lambda: 2.0,
            s_r: 1.0,
        }
    }
}

impl AuraMode {
    pub fn fixed(s_r: f64) -> Self {
        Self {
            variant: AuraVariant::Fixed,
            s_r,
            ..Self::default()
        }
    }

    pub fn relative(lambda: f64) -> Self {
        Self {
            variant: AuraVariant::Relative,
            lambda,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                reason: "must be positive".into(),
            });
        }
        if !(self.s_r.is_finite() && self.s_r > 0.0) {
            return Err(Error::InvalidParameter {
                name: "s_r",
                reason: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Anchor points for one frame. Each center is present only when the
/// landmarks it is built from pass the visibility gate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AnchorSet {
    pub mouth_center: Option<Point2>,
    pub mouth_center_3d: Option<Point3>,
    pub hand_center_left: Option<Point2>,
    pub hand_center_left_3d: Option<Point3>,
    pub hand_center_right: Option<Point2>,
    pub hand_center_right_3d: Option<Point3>,
}

impl AnchorSet {
    pub fn hand(&self, side: Side) -> Option<(Point2, Point3)> {
        match side {
            Side::Left => self.hand_center_left.zip(self.hand_center_left_3d),
            Side::Right => self.hand_center_right.zip(self.hand_center_right_3d),
        }
    }

    pub fn mouth(&self) -> Option<(Point2, Point3)> {
        self.mouth_center.zip(self.mouth_center_3d)
    }
}

fn mean_of<'a>(landmarks: impl Iterator<Item = &'a Landmark>, header: &StreamHeader) -> Option<(Point2, Point3)> {
    let mut n = 0usize;
    let (mut px, mut py) = (0.0, 0.0);
    let (mut x, mut y, mut z) = (0.0, 0.0, 0.0);
    for lm in landmarks {
        let p = to_pixels(lm, header);
        px += p.x;
        py += p.y;
        x += lm.x;
        y += lm.y;
        z += lm.z;
        n += 1;
    }
    if n == 0 {
        return None;
    }
    let n = n as f64;
    Some((Point2::new(px / n, py / n), Point3::new(x / n, y / n, z / n)))
}

/// Mouth center is the mean of the valid mouth corners; each hand center is the
/// mean of its valid wrist/index/pinky/thumb, and requires a valid wrist.
pub fn anchors(frame: &KeypointFrame, header: &StreamHeader, tau_valid: f64) -> AnchorSet {
    let mouth = mean_of(
        Side::BOTH
            .iter()
            .filter_map(|&s| frame.valid(LandmarkId::mouth(s), tau_valid)),
        header,
    );
    let hand = |side: Side| {
        frame.valid(LandmarkId::wrist(side), tau_valid)?;
        mean_of(
            LandmarkId::hand(side)
                .iter()
                .filter_map(|&id| frame.valid(id, tau_valid)),
            header,
        )
    };
    let left = hand(Side::Left);
    let right = hand(Side::Right);
    AnchorSet {
        mouth_center: mouth.map(|m| m.0),
        mouth_center_3d: mouth.map(|m| m.1),
        hand_center_left: left.map(|h| h.0),
        hand_center_left_3d: left.map(|h| h.1),
        hand_center_right: right.map(|h| h.0),
        hand_center_right_3d: right.map(|h| h.1),
    }
}

fn pair_px(frame: &KeypointFrame, header: &StreamHeader, tau_valid: f64, a: LandmarkId, b: LandmarkId) -> Option<f64> {
    let a = frame.valid(a, tau_valid)?;
    let b = frame.valid(b, tau_valid)?;
    Some(dist_2d(to_pixels(a, header), to_pixels(b, header)))
}

fn max_opt(terms: impl IntoIterator<Item = Option<f64>>) -> Option<f64> {
    terms
        .into_iter()
        .flatten()
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
}

/// Head size in pixels: the largest of the ear-to-ear distance and twice each
/// eyebrow-to-mouth-corner distance, over the pairs whose landmarks are valid.
/// `None` when no pair is computable.
pub fn head_size(frame: &KeypointFrame, header: &StreamHeader, tau_valid: f64) -> Option<f64> {
    let ears = pair_px(frame, header, tau_valid, LandmarkId::EarLeft, LandmarkId::EarRight);
    let brow = |side| {
        pair_px(
            frame,
            header,
            tau_valid,
            LandmarkId::eyebrow(side),
            LandmarkId::mouth(side),
        )
        .map(|d| 2.0 * d)
    };
    max_opt([ears, brow(Side::Left), brow(Side::Right)])
}

/// Hand size in pixels: over both sides, the largest of pinky-to-thumb and
/// wrist-to-index distances. `None` when no pair is computable.
pub fn hand_size(frame: &KeypointFrame, header: &StreamHeader, tau_valid: f64) -> Option<f64> {
    max_opt(Side::BOTH.iter().flat_map(|&side| {
        [
            pair_px(
                frame,
                header,
                tau_valid,
                LandmarkId::pinky(side),
                LandmarkId::thumb(side),
            ),
            pair_px(
                frame,
                header,
                tau_valid,
                LandmarkId::wrist(side),
                LandmarkId::index_finger(side),
            ),
        ]
    }))
}

/// Radii in effect for one frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuraRadii {
    pub mouth: f64,
    pub hand: f64,
    /// Relative mode fell back to the fixed mouth radius.
    pub mouth_fallback: bool,
    /// Relative mode fell back to the fixed hand radius.
    pub hand_fallback: bool,
}

/// Fixed mode: `s_r` times the base radii. Relative mode: `lambda` times the
/// head and hand sizes, with each unavailable size replaced by its fixed-mode
/// radius.
pub fn aura_radii(mode: &AuraMode, r_m_base: f64, r_h_base: f64, head: Option<f64>, hand: Option<f64>) -> AuraRadii {
    let fixed_m = mode.s_r * r_m_base;
    let fixed_h = mode.s_r * r_h_base;
    match mode.variant {
        AuraVariant::Fixed => AuraRadii {
            mouth: fixed_m,
            hand: fixed_h,
            mouth_fallback: false,
            hand_fallback: false,
        },
        AuraVariant::Relative => AuraRadii {
            mouth: head.map_or(fixed_m, |h| mode.lambda * h),
            hand: hand.map_or(fixed_h, |h| mode.lambda * h),
            mouth_fallback: head.is_none(),
            hand_fallback: hand.is_none(),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn hd() -> StreamHeader {
        StreamHeader::new("v", 25.0, 1280, 720)
    }

    fn lm(x: f64, y: f64, v: f64) -> Landmark {
        Landmark::new(x, y, 0.0, v)
    }

    /// Landmark at a pixel position on the 1280x720 header.
    fn px(x: f64, y: f64) -> Landmark {
        Landmark::new(x / 1280.0, y / 720.0, 0.0, 1.0)
    }

    #[test]
    fn distances() {
        assert_eq!(dist_2d(Point2::new(0.0, 0.0), Point2::new(3.0, 4.0)), 5.0);
        assert_eq!(dist_2d(Point2::new(7.0, 1.0), Point2::new(7.0, 1.0)), 0.0);
        assert_eq!(dist_2d(Point2::new(640.0, 360.0), Point2::new(640.0, 110.0)), 250.0);
        assert_eq!(dist_3d(Point3::default(), Point3::new(0.0, 0.0, 0.3)), 0.3);
        assert_eq!(dist_3d(Point3::new(1.0, 2.0, 3.0), Point3::new(1.0, 2.0, 3.0)), 0.0);
        assert_abs_diff_eq!(
            dist_3d(Point3::default(), Point3::new(0.1, 0.2, 0.2)),
            0.3,
            epsilon = 1e-15
        );
    }

    #[test]
    fn mouth_center_is_corner_midpoint() {
        let f = KeypointFrame::new(0, 0.0)
            .with(LandmarkId::MouthLeft, lm(0.49, 0.30, 0.9))
            .with(LandmarkId::MouthRight, lm(0.51, 0.30, 0.9));
        let a = anchors(&f, &hd(), 0.7);
        let m = a.mouth_center.unwrap();
        assert_abs_diff_eq!(m.x, 640.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.y, 216.0, epsilon = 1e-9);
    }

    #[test]
    fn single_valid_mouth_corner() {
        let f = KeypointFrame::new(0, 0.0)
            .with(LandmarkId::MouthLeft, lm(0.49, 0.30, 0.9))
            .with(LandmarkId::MouthRight, lm(0.51, 0.30, 0.1));
        let m = anchors(&f, &hd(), 0.7).mouth_center.unwrap();
        assert_abs_diff_eq!(m.x, 0.49 * 1280.0, epsilon = 1e-9);
        assert_abs_diff_eq!(m.y, 0.30 * 720.0, epsilon = 1e-9);
    }

    #[test]
    fn hand_center_requires_wrist() {
        let f = KeypointFrame::new(0, 0.0)
            .with(LandmarkId::WristLeft, lm(0.3, 0.7, 0.2))
            .with(LandmarkId::IndexLeft, lm(0.3, 0.65, 0.9))
            .with(LandmarkId::WristRight, lm(0.7, 0.7, 0.9))
            .with(LandmarkId::IndexRight, lm(0.7, 0.6, 0.9))
            .with(LandmarkId::ThumbRight, lm(0.7, 0.6, 0.1));
        let a = anchors(&f, &hd(), 0.7);
        assert!(a.hand_center_left.is_none());
        assert!(a.hand_center_left_3d.is_none());
        let r = a.hand_center_right.unwrap();
        assert_abs_diff_eq!(r.x, 0.7 * 1280.0, epsilon = 1e-9);
        assert_abs_diff_eq!(r.y, 0.65 * 720.0, epsilon = 1e-9);
    }

    #[test]
    fn head_size_terms() {
        let ears_only = KeypointFrame::new(0, 0.0)
            .with(LandmarkId::EarLeft, px(500.0, 200.0))
            .with(LandmarkId::EarRight, px(620.0, 200.0));
        assert_abs_diff_eq!(head_size(&ears_only, &hd(), 0.7).unwrap(), 120.0, epsilon = 1e-9);

        let doubled = KeypointFrame::new(0, 0.0)
            .with(LandmarkId::EarLeft, px(500.0, 200.0))
            .with(LandmarkId::EarRight, px(600.0, 200.0))
            .with(LandmarkId::EyebrowLeft, px(530.0, 150.0))
            .with(LandmarkId::MouthLeft, px(530.0, 210.0));
        assert_abs_diff_eq!(head_size(&doubled, &hd(), 0.7).unwrap(), 120.0, epsilon = 1e-9);

        let none = KeypointFrame::new(0, 0.0).with(LandmarkId::EarLeft, px(1.0, 1.0));
        assert_eq!(head_size(&none, &hd(), 0.7), None);
    }

    #[test]
    fn hand_size_terms() {
        let left = KeypointFrame::new(0, 0.0)
            .with(LandmarkId::PinkyLeft, px(300.0, 500.0))
            .with(LandmarkId::ThumbLeft, px(340.0, 500.0));
        assert_abs_diff_eq!(hand_size(&left, &hd(), 0.7).unwrap(), 40.0, epsilon = 1e-9);

        let both = left
            .clone()
            .with(LandmarkId::WristRight, px(800.0, 500.0))
            .with(LandmarkId::IndexRight, px(800.0, 445.0));
        assert_abs_diff_eq!(hand_size(&both, &hd(), 0.7).unwrap(), 55.0, epsilon = 1e-9);

        assert_eq!(hand_size(&KeypointFrame::new(0, 0.0), &hd(), 0.7), None);
    }

    #[test]
    fn radii() {
        let r = aura_radii(&AuraMode::fixed(1.0), 150.0, 100.0, Some(80.0), Some(45.0));
        assert_eq!((r.mouth, r.hand), (150.0, 100.0));
        let r = aura_radii(&AuraMode::fixed(0.9), 150.0, 100.0, None, None);
        assert_abs_diff_eq!(r.mouth, 135.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.hand, 90.0, epsilon = 1e-12);
        let r = aura_radii(&AuraMode::relative(2.0), 150.0, 100.0, Some(80.0), Some(45.0));
        assert_eq!((r.mouth, r.hand), (160.0, 90.0));
        assert!(!r.mouth_fallback && !r.hand_fallback);
        let r = aura_radii(&AuraMode::relative(2.0), 150.0, 100.0, None, Some(45.0));
        assert_eq!((r.mouth, r.hand), (150.0, 90.0));
        assert!(r.mouth_fallback && !r.hand_fallback);
    }

    fn p2() -> impl Strategy<Value = Point2> {
        (-2000.0..2000.0f64, -2000.0..2000.0f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    fn p3() -> impl Strategy<Value = Point3> {
        (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Point3::new(x, y, z))
    }

    fn full_frame() -> impl Strategy<Value = KeypointFrame> {
        proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), LandmarkId::MANDATORY.len()).prop_map(|coords| {
            let mut f = KeypointFrame::new(0, 0.0);
            for (id, (x, y)) in LandmarkId::MANDATORY.iter().zip(coords) {
                f.landmarks.insert(*id, Landmark::new(x, y, 0.0, 1.0));
            }
            f
        })
    }

    proptest! {
        #[test]
        fn metric_axioms_2d(a in p2(), b in p2(), c in p2()) {
            prop_assert_eq!(dist_2d(a, b), dist_2d(b, a));
            prop_assert!(dist_2d(a, b) >= 0.0);
            prop_assert!(dist_2d(a, c) <= dist_2d(a, b) + dist_2d(b, c) + 1e-9);
        }

        #[test]
        fn metric_axioms_3d(a in p3(), b in p3(), c in p3()) {
            prop_assert_eq!(dist_3d(a, b), dist_3d(b, a));
            prop_assert!(dist_3d(a, b) >= 0.0);
            prop_assert!(dist_3d(a, c) <= dist_3d(a, b) + dist_3d(b, c) + 1e-12);
        }

        #[test]
        fn sizes_translate_and_scale(f in full_frame(), dx in -0.5..0.5f64, dy in -0.5..0.5f64, k in 1u32..4) {
            let h = hd();
            let mut moved = f.clone();
            for lm in moved.landmarks.values_mut() {
                lm.x += dx;
                lm.y += dy;
            }
            let head = head_size(&f, &h, 0.7).unwrap();
            let hand = hand_size(&f, &h, 0.7).unwrap();
            prop_assert!((head_size(&moved, &h, 0.7).unwrap() - head).abs() < 1e-9);
            prop_assert!((hand_size(&moved, &h, 0.7).unwrap() - hand).abs() < 1e-9);

            let big = StreamHeader::new("v", 25.0, 1280 * k, 720 * k);
            let k = f64::from(k);
            prop_assert!((head_size(&f, &big, 0.7).unwrap() - k * head).abs() < 1e-9 * k * (1.0 + head));
            prop_assert!((hand_size(&f, &big, 0.7).unwrap() - k * hand).abs() < 1e-9 * k * (1.0 + hand));
        }

        #[test]
        fn relative_ratio_scale_invariant(f in full_frame(), k in 1u32..5) {
            let ratio = |h: &StreamHeader| {
                let a = anchors(&f, h, 0.7);
                let r = aura_radii(&AuraMode::relative(2.0), 150.0, 100.0, head_size(&f, h, 0.7), hand_size(&f, h, 0.7));
                dist_2d(a.mouth_center.unwrap(), a.hand_center_left.unwrap()) / (r.mouth + r.hand)
            };
            let base = ratio(&StreamHeader::new("v", 25.0, 640, 360));
            let scaled = ratio(&StreamHeader::new("v", 25.0, 640 * k, 360 * k));
            prop_assert!((base - scaled).abs() < 1e-9);
        }
    }
}
