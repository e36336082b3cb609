//! Landmark vocabulary and per-landmark observations.

use core::fmt;
use core::str::FromStr;

use alloc::string::ToString;

use crate::Error;

/// Body side of a paired landmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Left, Side::Right];

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "left",
            Side::Right => "right",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

macro_rules! landmarks {
    ($($variant:ident => $name:literal,)+) => {
        /// Anatomical landmark identifier.
        ///
        /// The head and hand members are the ones the collision detector and
        /// the body-size estimates need; the remaining body landmarks only feed
        /// the agitation velocity statistics.
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum LandmarkId {
            $($variant,)+
        }

        impl LandmarkId {
            /// Every member of the vocabulary, in declaration order.
            pub const ALL: &'static [LandmarkId] = &[$(LandmarkId::$variant,)+];

            /// Wire name (lowercase snake case).
            pub fn as_str(self) -> &'static str {
                match self {
                    $(LandmarkId::$variant => $name,)+
                }
            }
        }

        impl FromStr for LandmarkId {
            type Err = Error;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($name => Ok(LandmarkId::$variant),)+
                    other => Err(Error::UnknownLandmark(other.to_string())),
                }
            }
        }
    };
}

landmarks! {
    Nose => "nose",
    EyeLeft => "eye_left",
    EyeRight => "eye_right",
    EarLeft => "ear_left",
    EarRight => "ear_right",
    EyebrowLeft => "eyebrow_left",
    EyebrowRight => "eyebrow_right",
    MouthLeft => "mouth_left",
    MouthRight => "mouth_right",
    ShoulderLeft => "shoulder_left",
    ShoulderRight => "shoulder_right",
    ElbowLeft => "elbow_left",
    ElbowRight => "elbow_right",
    WristLeft => "wrist_left",
    WristRight => "wrist_right",
    PinkyLeft => "pinky_left",
    PinkyRight => "pinky_right",
    IndexLeft => "index_left",
    IndexRight => "index_right",
    ThumbLeft => "thumb_left",
    ThumbRight => "thumb_right",
    HipLeft => "hip_left",
    HipRight => "hip_right",
    KneeLeft => "knee_left",
    KneeRight => "knee_right",
    AnkleLeft => "ankle_left",
    AnkleRight => "ankle_right",
    HeelLeft => "heel_left",
    HeelRight => "heel_right",
    FootIndexLeft => "foot_index_left",
    FootIndexRight => "foot_index_right",
}

impl LandmarkId {
    /// The fourteen head and hand landmarks the collision logic depends on.
    pub const MANDATORY: [LandmarkId; 14] = [
        LandmarkId::MouthLeft,
        LandmarkId::MouthRight,
        LandmarkId::EarLeft,
        LandmarkId::EarRight,
        LandmarkId::EyebrowLeft,
        LandmarkId::EyebrowRight,
        LandmarkId::WristLeft,
        LandmarkId::WristRight,
        LandmarkId::PinkyLeft,
        LandmarkId::PinkyRight,
        LandmarkId::IndexLeft,
        LandmarkId::IndexRight,
        LandmarkId::ThumbLeft,
        LandmarkId::ThumbRight,
    ];

    pub fn wrist(side: Side) -> Self {
        match side {
            Side::Left => LandmarkId::WristLeft,
            Side::Right => LandmarkId::WristRight,
        }
    }

    pub fn index_finger(side: Side) -> Self {
        match side {
            Side::Left => LandmarkId::IndexLeft,
            Side::Right => LandmarkId::IndexRight,
        }
    }

    pub fn pinky(side: Side) -> Self {
        match side {
            Side::Left => LandmarkId::PinkyLeft,
            Side::Right => LandmarkId::PinkyRight,
        }
    }

    pub fn thumb(side: Side) -> Self {
        match side {
            Side::Left => LandmarkId::ThumbLeft,
            Side::Right => LandmarkId::ThumbRight,
        }
    }

    pub fn eyebrow(side: Side) -> Self {
        match side {
            Side::Left => LandmarkId::EyebrowLeft,
            Side::Right => LandmarkId::EyebrowRight,
        }
    }

    pub fn mouth(side: Side) -> Self {
        match side {
            Side::Left => LandmarkId::MouthLeft,
            Side::Right => LandmarkId::MouthRight,
        }
    }

    /// Hand landmarks averaged into the hand anchor, wrist first.
    pub fn hand(side: Side) -> [LandmarkId; 4] {
        [
            Self::wrist(side),
            Self::index_finger(side),
            Self::pinky(side),
            Self::thumb(side),
        ]
    }
}

impl fmt::Display for LandmarkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One landmark observation in normalized image coordinates.
///
/// `x` and `y` are fractions of frame width and height and may fall outside
/// `[0, 1]` when the landmark leaves the frame. `z` is depth on the same scale
/// as `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Landmark {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub visibility: f64,
}

impl Landmark {
    pub fn new(x: f64, y: f64, z: f64, visibility: f64) -> Self {
        Self { x, y, z, visibility }
    }

    /// Visibility gate: a landmark is usable iff `visibility >= tau_valid`.
    pub fn is_valid(&self, tau_valid: f64) -> bool {
        self.visibility >= tau_valid
    }

    pub(crate) fn check(&self) -> Result<(), &'static str> {
        if !(self.x.is_finite() && self.y.is_finite() && self.z.is_finite()) {
            return Err("has a non-finite coordinate");
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return Err("has visibility outside [0, 1]");
        }
        Ok(())
    }
}

/// Free-function form of [`Landmark::is_valid`].
pub fn is_valid(lm: &Landmark, tau_valid: f64) -> bool {
    lm.is_valid(tau_valid)
}
