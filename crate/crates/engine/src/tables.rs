//! CSV inputs: per-video labels or predictions, and rating matrices.

use std::collections::BTreeMap;
use std::path::Path;

use aura_core::metrics::RatingMatrix;
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{EngineError, Result};

/// Behaviour flags of one video. The same shape serves as ground truth and as
/// predictions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRow {
    pub video_id: String,
    #[serde(deserialize_with = "flag", serialize_with = "write_flag")]
    pub collision: bool,
    #[serde(deserialize_with = "flag", serialize_with = "write_flag")]
    pub agitation: bool,
}

fn flag<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<bool, D::Error> {
    let s = String::deserialize(d)?;
    match s.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Ok(true),
        "0" | "false" | "no" => Ok(false),
        other => Err(serde::de::Error::custom(format!(
            "expected 0/1 or true/false, found {other:?}"
        ))),
    }
}

fn write_flag<S: serde::Serializer>(v: &bool, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_u8(u8::from(*v))
}

/// Parses a label table keyed by video id. Duplicate ids and empty tables are
/// errors.
pub fn parse_labels(source: &[u8]) -> Result<BTreeMap<String, (bool, bool)>> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let mut out = BTreeMap::new();
    for (i, row) in reader.deserialize::<LabelRow>().enumerate() {
        let line = i + 2;
        let row = row.map_err(|e| EngineError::Parse {
            line,
            message: e.to_string(),
        })?;
        if out
            .insert(row.video_id.clone(), (row.collision, row.agitation))
            .is_some()
        {
            return Err(EngineError::Parse {
                line,
                message: format!("duplicate video_id {:?}", row.video_id),
            });
        }
    }
    if out.is_empty() {
        return Err(EngineError::Input("label table has no rows".into()));
    }
    Ok(out)
}

pub fn read_labels(path: &Path) -> Result<BTreeMap<String, (bool, bool)>> {
    let bytes = std::fs::read(path).map_err(|e| EngineError::io(path, e))?;
    parse_labels(&bytes).map_err(|e| EngineError::Input(format!("{}: {e}", path.display())))
}

pub fn serialize_labels(rows: &BTreeMap<String, (bool, bool)>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for (id, &(collision, agitation)) in rows {
        w.serialize(LabelRow {
            video_id: id.clone(),
            collision,
            agitation,
        })
        .map_err(|e| EngineError::Internal(e.to_string()))?;
    }
    w.into_inner().map_err(|e| EngineError::Internal(e.to_string()))
}

/// A rating table: header row names the raters, each following row starts
/// with a subject id.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingTable {
    pub raters: Vec<String>,
    pub subjects: Vec<String>,
    pub matrix: RatingMatrix,
}

pub fn parse_ratings(source: &[u8]) -> Result<RatingTable> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(source);
    let header = reader
        .headers()
        .map_err(|e| EngineError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let raters: Vec<String> = header.iter().skip(1).map(String::from).collect();
    let mut subjects = Vec::new();
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let line = i + 2;
        let rec = rec.map_err(|e| EngineError::Parse {
            line,
            message: e.to_string(),
        })?;
        let mut fields = rec.iter();
        subjects.push(fields.next().unwrap_or_default().to_string());
        let values = fields
            .map(|f| {
                f.parse::<f64>().map_err(|_| EngineError::Parse {
                    line,
                    message: format!("rating {f:?} is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    let matrix = RatingMatrix::from_rows(&rows)?;
    Ok(RatingTable {
        raters,
        subjects,
        matrix,
    })
}
