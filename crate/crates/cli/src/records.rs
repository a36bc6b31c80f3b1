//! Bitext record streams in TSV and JSONL form.
//!
//! TSV rows are `src_lang  tgt_lang  src_text  tgt_text  origin`; JSONL
//! carries the same fields as an object. In both forms a backtranslated
//! record's source text may carry the `__bt__ ` prefix, which is stripped
//! into the `bt_tagged` flag on read and re-applied on write. Free text with
//! tabs or newlines needs JSONL; the TSV writer rejects it.

use std::io::{BufRead, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use mmt_core::filter::{BitextRecord, Origin, BT_TOKEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RecordFormat {
    Tsv,
    Jsonl,
}

impl RecordFormat {
    /// Picks a format from an explicit flag, else the file extension,
    /// else TSV.
    pub fn detect(explicit: Option<RecordFormat>, path: Option<&Path>) -> RecordFormat {
        if let Some(f) = explicit {
            return f;
        }
        if let Some(p) = path {
            if p.extension().and_then(|e| e.to_str()) == Some("jsonl") {
                return RecordFormat::Jsonl;
            }
        }
        RecordFormat::Tsv
    }
}

fn origin_from_str(s: &str, line: usize) -> Result<Origin> {
    match s {
        "mined" => Ok(Origin::Mined),
        "backtranslated" => Ok(Origin::Backtranslated),
        other => bail!("line {line}: origin must be mined|backtranslated, got {other:?}"),
    }
}

/// Splits a serialized source text into (bt_tagged, clean text).
fn split_bt_prefix(src_text: &str, origin: Origin, line: usize) -> Result<(bool, String)> {
    if let Some(rest) = src_text.strip_prefix(&format!("{BT_TOKEN} ")) {
        if origin != Origin::Backtranslated {
            bail!("line {line}: {BT_TOKEN} prefix on a mined record");
        }
        return Ok((true, rest.to_string()));
    }
    Ok((false, src_text.to_string()))
}

pub fn parse_record(line_no: usize, raw: &str, format: RecordFormat) -> Result<BitextRecord> {
    let (src_lang, tgt_lang, src_text, tgt_text, origin) = match format {
        RecordFormat::Tsv => {
            let fields: Vec<&str> = raw.split('\t').collect();
            if fields.len() != 5 {
                bail!(
                    "line {line_no}: expected 5 tab-separated fields, found {}",
                    fields.len()
                );
            }
            (
                fields[0].to_string(),
                fields[1].to_string(),
                fields[2].to_string(),
                fields[3].to_string(),
                origin_from_str(fields[4], line_no)?,
            )
        }
        RecordFormat::Jsonl => {
            let v: serde_json::Value = serde_json::from_str(raw)
                .with_context(|| format!("line {line_no}: invalid JSON"))?;
            let get = |key: &str| -> Result<String> {
                v.get(key)
                    .and_then(|x| x.as_str())
                    .map(|s| s.to_string())
                    .ok_or_else(|| anyhow!("line {line_no}: missing string field {key:?}"))
            };
            (
                get("src_lang")?,
                get("tgt_lang")?,
                get("src_text")?,
                get("tgt_text")?,
                origin_from_str(&get("origin")?, line_no)?,
            )
        }
    };
    let (bt_tagged, src_text) = split_bt_prefix(&src_text, origin, line_no)?;
    let record = BitextRecord {
        src_lang,
        tgt_lang,
        src_text,
        tgt_text,
        origin,
        bt_tagged,
    };
    record
        .validate(None)
        .map_err(|e| anyhow!("line {line_no}: {e}"))?;
    Ok(record)
}

/// Serializes a record, optionally with a trailing shard column/field.
pub fn write_record(
    out: &mut dyn Write,
    record: &BitextRecord,
    format: RecordFormat,
    shard: Option<u32>,
) -> Result<()> {
    match format {
        RecordFormat::Tsv => {
            let src = record.serialized_src();
            for field in [&record.src_lang, &record.tgt_lang, &src, &record.tgt_text] {
                if field.contains('\t') || field.contains('\n') {
                    bail!("field contains tab/newline; use --format jsonl");
                }
            }
            write!(
                out,
                "{}\t{}\t{}\t{}\t{}",
                record.src_lang, record.tgt_lang, src, record.tgt_text, record.origin
            )?;
            if let Some(s) = shard {
                write!(out, "\t{s}")?;
            }
            writeln!(out)?;
        }
        RecordFormat::Jsonl => {
            let mut obj = serde_json::json!({
                "src_lang": record.src_lang,
                "tgt_lang": record.tgt_lang,
                "src_text": record.serialized_src(),
                "tgt_text": record.tgt_text,
                "origin": record.origin.to_string(),
            });
            if let Some(s) = shard {
                obj["shard"] = serde_json::json!(s);
            }
            writeln!(out, "{obj}")?;
        }
    }
    Ok(())
}

/// Reads records line by line, feeding non-empty, non-comment lines to `f`.
pub fn for_each_record(
    reader: &mut dyn BufRead,
    format: RecordFormat,
    mut f: impl FnMut(usize, BitextRecord) -> Result<()>,
) -> Result<()> {
    let mut line_no = 0usize;
    let mut buf = String::new();
    loop {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            return Ok(());
        }
        line_no += 1;
        let raw = buf.trim_end_matches(['\n', '\r']);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let record = parse_record(line_no, raw, format)?;
        f(line_no, record)?;
    }
}

/// Collects raw lines in batches for parallel stages. `line_no` carries the
/// running 1-based line count across calls.
pub fn read_batch(
    reader: &mut dyn BufRead,
    batch_size: usize,
    line_no: &mut usize,
) -> Result<Vec<(usize, String)>, std::io::Error> {
    let mut batch = Vec::with_capacity(batch_size);
    let mut buf = String::new();
    while batch.len() < batch_size {
        buf.clear();
        if reader.read_line(&mut buf)? == 0 {
            break;
        }
        *line_no += 1;
        let raw = buf.trim_end_matches(['\n', '\r']);
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        batch.push((*line_no, raw.to_string()));
    }
    Ok(batch)
}
