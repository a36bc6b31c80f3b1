use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmt_core::router;

use crate::manifest::{self, ManifestBuilder};

#[derive(Args)]
pub struct CombineArgs {
    /// JSONL input; each line holds {"logprobs": [[..], ..]} and an
    /// optional "id". Standard input when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Comma-separated ensemble weights, e.g. "0.9,0.1".
    #[arg(long)]
    pub weights: String,
    /// Combined scores JSONL: {"id", "scores", "argmax"}.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn combine(args: CombineArgs) -> Result<()> {
    let weights: Vec<f64> = args
        .weights
        .split(',')
        .map(|w| w.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("parsing weights {:?}", args.weights))?;

    let reader: Box<dyn BufRead> = match &args.input {
        Some(path) => Box::new(BufReader::new(fs::File::open(path)?)),
        None => Box::new(BufReader::new(std::io::stdin())),
    };
    let mut writer = BufWriter::new(fs::File::create(&args.out)?);

    let mut combined = 0u64;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)
            .with_context(|| format!("line {}: invalid JSON", idx + 1))?;
        let Some(dists) = v.get("logprobs") else {
            bail!("line {}: missing \"logprobs\"", idx + 1);
        };
        let distributions: Vec<Vec<f64>> = serde_json::from_value(dists.clone())
            .with_context(|| format!("line {}: \"logprobs\" must be an array of arrays", idx + 1))?;
        let scores = router::combine_logprobs(&distributions, &weights)
            .with_context(|| format!("line {}", idx + 1))?;
        let argmax = router::argmax(&scores);
        writeln!(
            writer,
            "{}",
            serde_json::json!({
                "id": v.get("id").cloned().unwrap_or(serde_json::Value::Null),
                "scores": scores,
                "argmax": argmax,
            })
        )?;
        combined += 1;
    }
    writer.flush()?;
    eprintln!("combined {combined} ensembles");

    let m = ManifestBuilder::new("ensemble combine")
        .input_opt(args.input.as_ref())?
        .config(serde_json::json!({ "weights": weights }))
        .output(&args.out)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}
