//! Small shared I/O helpers: strict TSV row splitting and content hashing.
//!
//! The on-disk formats in this toolkit are deliberately plain: tab-separated
//! columns, one record per line, `#`-prefixed comment lines ignored. Fields
//! may not contain tabs or newlines; JSONL is the escape hatch for free text.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TsvError {
    #[error("{path}:{line}: expected {expected} tab-separated fields, found {found}")]
    FieldCount {
        path: String,
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("{path}:{line}: {msg}")]
    Field {
        path: String,
        line: usize,
        msg: String,
    },
    #[error("failed to read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: io::Error,
    },
}

/// One parsed data row: 1-based line number plus its fields.
#[derive(Debug)]
pub struct TsvRow<'a> {
    pub line: usize,
    pub fields: Vec<&'a str>,
}

/// Splits TSV content into rows of exactly `columns` fields, skipping blank
/// lines and `#` comments. Line numbers refer to the original file.
pub fn parse_tsv<'a>(
    content: &'a str,
    path: &str,
    columns: usize,
) -> Result<Vec<TsvRow<'a>>, TsvError> {
    let mut rows = Vec::new();
    for (idx, raw) in content.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != columns {
            return Err(TsvError::FieldCount {
                path: path.to_string(),
                line,
                expected: columns,
                found: fields.len(),
            });
        }
        rows.push(TsvRow { line, fields });
    }
    Ok(rows)
}

pub fn read_to_string(path: &Path) -> Result<String, TsvError> {
    fs::read_to_string(path).map_err(|source| TsvError::Read {
        path: path.display().to_string(),
        source,
    })
}

pub fn field_error(path: &str, line: usize, msg: impl Into<String>) -> TsvError {
    TsvError::Field {
        path: path.to_string(),
        line,
        msg: msg.into(),
    }
}

/// SHA-256 of a byte slice as lowercase hex.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// SHA-256 of a file's contents as lowercase hex.
pub fn sha256_file(path: &Path) -> Result<String, TsvError> {
    let bytes = fs::read(path).map_err(|source| TsvError::Read {
        path: path.display().to_string(),
        source,
    })?;
    Ok(sha256_hex(&bytes))
}
