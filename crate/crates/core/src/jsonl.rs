//! Line-delimited JSON artifacts.
//!
//! Every record written by the toolkit carries a `schema_version` field.
//! Hand-written inputs (ground truth, annotations) may omit it.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct Out<'a, T> {
    schema_version: u32,
    #[serde(flatten)]
    record: &'a T,
}

#[derive(Deserialize)]
struct In<T> {
    #[serde(default)]
    schema_version: Option<u32>,
    #[serde(flatten)]
    record: T,
}

/// Serialize one record as a single JSON line (no trailing newline).
pub fn to_line<T: Serialize>(record: &T) -> String {
    serde_json::to_string(&Out {
        schema_version: SCHEMA_VERSION,
        record,
    })
    .expect("record serializes")
}

pub fn to_string<T: Serialize>(records: &[T]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&to_line(r));
        s.push('\n');
    }
    s
}

pub fn write<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for r in records {
        w.write_all(to_line(r).as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn parse_line<T: DeserializeOwned>(path: &Path, lineno: usize, line: &str) -> Result<T> {
    let parsed: In<T> = serde_json::from_str(line).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        line: lineno,
        source,
    })?;
    match parsed.schema_version {
        Some(v) if v != SCHEMA_VERSION => Err(Error::SchemaVersion {
            path: path.to_path_buf(),
            line: lineno,
            found: v,
            expected: SCHEMA_VERSION,
        }),
        _ => Ok(parsed.record),
    }
}

/// Parse JSONL text; the first bad line is an error.
pub fn parse_str<T: DeserializeOwned>(path: &Path, text: &str) -> Result<Vec<T>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| parse_line(path, i + 1, l))
        .collect()
}

pub fn read<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_str(path, &text)
}

/// Read JSONL, skipping malformed rows. Each skipped row yields a warning
/// string naming the file and line.
pub fn read_lenient<T: DeserializeOwned>(path: &Path) -> Result<(Vec<T>, Vec<String>)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(path, i + 1, line) {
            Ok(r) => records.push(r),
            Err(e) => {
                log::warn!("skipping row: {e}");
                warnings.push(e.to_string());
            }
        }
    }
    Ok((records, warnings))
}

/// Pretty JSON document with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
    }
    let mut s = serde_json::to_string_pretty(value).expect("value serializes");
    s.push('\n');
    fs::write(path, s).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        line: source.line(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Debug, Serialize, Deserialize, PartialEq)]
    struct Row {
        a: u32,
        b: String,
    }

    #[test]
    fn versioned_roundtrip() {
        let rows = vec![Row { a: 1, b: "x".into() }, Row { a: 2, b: "y".into() }];
        let text = to_string(&rows);
        assert!(text.starts_with("{\"schema_version\":1,\"a\":1"));
        let back: Vec<Row> = parse_str(Path::new("t"), &text).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn version_is_optional_but_checked() {
        let ok: Vec<Row> = parse_str(Path::new("t"), "{\"a\":1,\"b\":\"q\"}\n\n").unwrap();
        assert_eq!(ok.len(), 1);
        let err = parse_str::<Row>(Path::new("t"), "{\"schema_version\":9,\"a\":1,\"b\":\"q\"}").unwrap_err();
        assert!(matches!(err, Error::SchemaVersion { found: 9, .. }));
    }

    #[test]
    fn lenient_skips_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.jsonl");
        fs::write(&p, "{\"a\":1,\"b\":\"q\"}\nnot json\n{\"a\":3}\n").unwrap();
        let (rows, warnings) = read_lenient::<Row>(&p).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(warnings.len(), 2);
        assert!(warnings[0].contains(":2:"));
    }
}
