use alloc::string::String;

/// Errors raised by the detection core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown landmark id `{0}`")]
    UnknownLandmark(String),

    #[error("invalid stream header: {0}")]
    InvalidHeader(String),

    #[error("frame {index}: landmark `{landmark}` {reason}")]
    InvalidLandmark {
        index: u64,
        landmark: &'static str,
        reason: &'static str,
    },

    #[error("frame index {index} does not follow {previous}")]
    NonMonotoneIndex { index: u64, previous: u64 },

    #[error("frame {index}: timestamp {timestamp_s} s precedes previous {previous_s} s")]
    NonMonotoneTimestamp {
        index: u64,
        timestamp_s: f64,
        previous_s: f64,
    },

    #[error("frame {index} at {timestamp_s} s applied after frame {last_index} at {last_timestamp_s} s")]
    OutOfOrderFrame {
        index: u64,
        timestamp_s: f64,
        last_index: u64,
        last_timestamp_s: f64,
    },

    #[error("time step must be positive, got {0}")]
    NonPositiveTimeStep(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{0} is empty")]
    Empty(&'static str),

    #[error("duplicate video id `{0}`")]
    DuplicateVideoId(String),

    #[error("no video with id `{0}`")]
    MissingVideo(String),

    #[error("every bootstrap replicate left the metric undefined")]
    AllReplicatesUndefined,

    #[error("metric is undefined on the full sample")]
    UndefinedMetric,

    #[error("invalid rating matrix: {0}")]
    InvalidRatings(String),

    #[error("expected {expected} distinct video ids, got {found}")]
    FoldSize { expected: usize, found: usize },

    #[error("scenario cannot be constructed: {0}")]
    Construction(String),
}
