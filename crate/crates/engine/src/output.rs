//! Output helpers: significant-digit rounding, JSON lines and atomic writes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{EngineError, Result};

/// Rounds to six significant digits so that serialized numbers print with at
/// most six.
pub fn sig6(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().unwrap_or(x)
}

pub fn sig6_opt(x: Option<f64>) -> Option<f64> {
    x.map(sig6)
}

/// Serializes records as newline-delimited JSON.
pub fn to_jsonl<T: Serialize>(records: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, &r).map_err(|e| EngineError::Internal(format!("serialization failed: {e}")))?;
        out.push(b'\n');
    }
    Ok(out)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| EngineError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| EngineError::io(tmp.path(), e))?;
    tmp.flush().map_err(|e| EngineError::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| EngineError::io(path, e.error))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn six_significant_digits() {
        assert_eq!(sig6(0.98), 0.98);
        assert_eq!(sig6(1.0 / 3.0), 0.333333);
        assert_eq!(sig6(48.0 / 49.0), 0.979592);
        assert_eq!(sig6(123456789.0), 123457000.0);
        assert_eq!(sig6(0.0), 0.0);
        assert_eq!(serde_json::to_string(&sig6(2.0 / 3.0e-5)).unwrap(), "66666.7");
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
