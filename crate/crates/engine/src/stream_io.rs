//! Keypoint stream files: a header line followed by one JSON frame per line.

use std::collections::BTreeMap;
use std::path::Path;

use aura_core::stream::check_order;
use aura_core::{KeypointFrame, KeypointStream, Landmark, LandmarkId, StreamHeader};
use serde::{Deserialize, Serialize};

use crate::error::{EngineError, Result};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeaderRecord {
    video_id: String,
    fps: f64,
    width_px: u32,
    height_px: u32,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LandmarkRecord {
    x: f64,
    y: f64,
    z: f64,
    visibility: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    index: u64,
    timestamp_s: f64,
    landmarks: BTreeMap<String, LandmarkRecord>,
}

fn parse_error(line: usize, e: impl std::fmt::Display) -> EngineError {
    EngineError::Parse {
        line,
        message: e.to_string(),
    }
}

/// Parses and validates a stream. Blank lines are ignored; line numbers in
/// errors are 1-based and count them.
pub fn parse_stream(source: &[u8]) -> Result<KeypointStream> {
    let text = std::str::from_utf8(source).map_err(|e| {
        let line = 1 + source[..e.valid_up_to()].iter().filter(|&&b| b == b'\n').count();
        parse_error(line, "invalid UTF-8")
    })?;
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty());

    let (header_line, raw) = lines.next().ok_or_else(|| parse_error(1, "missing header record"))?;
    let h: HeaderRecord = serde_json::from_str(raw).map_err(|e| parse_error(header_line, e))?;
    let header = StreamHeader::new(h.video_id, h.fps, h.width_px, h.height_px);
    header.validate().map_err(|source| EngineError::Invalid {
        line: header_line,
        source,
    })?;

    let mut frames: Vec<KeypointFrame> = Vec::new();
    for (line, raw) in lines {
        let rec: FrameRecord = serde_json::from_str(raw).map_err(|e| parse_error(line, e))?;
        let invalid = |source| EngineError::Invalid { line, source };
        let mut frame = KeypointFrame::new(rec.index, rec.timestamp_s);
        for (name, lm) in rec.landmarks {
            let id: LandmarkId = name.parse().map_err(invalid)?;
            frame
                .landmarks
                .insert(id, Landmark::new(lm.x, lm.y, lm.z, lm.visibility));
        }
        frame.validate().map_err(invalid)?;
        if let Some(prev) = frames.last() {
            check_order(prev, &frame).map_err(invalid)?;
        }
        frames.push(frame);
    }
    Ok(KeypointStream::new(header, frames)?)
}

pub fn read_stream(path: &Path) -> Result<KeypointStream> {
    let bytes = std::fs::read(path).map_err(|e| EngineError::io(path, e))?;
    parse_stream(&bytes).map_err(|e| match e {
        EngineError::Parse { line, message } => {
            EngineError::Input(format!("{}: line {line}: {message}", path.display()))
        }
        EngineError::Invalid { line, source } => {
            EngineError::Input(format!("{}: line {line}: {source}", path.display()))
        }
        other => other,
    })
}

/// Serializes a stream. Numbers are written at full precision so that
/// parsing the output reproduces the stream exactly.
pub fn serialize_stream(stream: &KeypointStream) -> Result<Vec<u8>> {
    let h = stream.header();
    let header = HeaderRecord {
        video_id: h.video_id.clone(),
        fps: h.fps,
        width_px: h.width_px,
        height_px: h.height_px,
    };
    let mut out = serde_json::to_vec(&header).map_err(|e| EngineError::Internal(e.to_string()))?;
    out.push(b'\n');
    for f in stream.frames() {
        let rec = FrameRecord {
            index: f.index,
            timestamp_s: f.timestamp_s,
            landmarks: f
                .landmarks
                .iter()
                .map(|(id, lm)| {
                    let r = LandmarkRecord {
                        x: lm.x,
                        y: lm.y,
                        z: lm.z,
                        visibility: lm.visibility,
                    };
                    (id.as_str().to_string(), r)
                })
                .collect(),
        };
        serde_json::to_writer(&mut out, &rec).map_err(|e| EngineError::Internal(e.to_string()))?;
        out.push(b'\n');
    }
    Ok(out)
}
