use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{anyhow, Context, Result};
use clap::Args;
use mmt_core::catalog::LanguageCatalog;
use mmt_core::filter::{
    filter_record, BitextRecord, CoreCharTable, FilterChain, FilterConfig, FilterOutcome,
    MissingTablePolicy, WhitespaceCounter,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::manifest::{self, ManifestBuilder};
use crate::records::{self, RecordFormat};

const BATCH_SIZE: usize = 8192;

/// On-disk filter configuration. Any omitted field keeps its default.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FilterConfigFile {
    punct_threshold: Option<f64>,
    max_subwords: Option<usize>,
    max_len_ratio: Option<f64>,
    core_char_threshold: Option<f64>,
    missing_table_policy: Option<MissingTablePolicy>,
    /// Path to a newline-separated evaluation-sentence blocklist.
    eval_blocklist: Option<PathBuf>,
    /// Per-language script overrides for the core-character tables.
    core_char_scripts: Option<BTreeMap<String, Vec<String>>>,
}

#[derive(Args)]
pub struct RunArgs {
    /// Record stream; standard input when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Kept records; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Filter configuration JSON.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Catalog used to derive per-language core-character tables.
    #[arg(long)]
    pub catalog: Option<PathBuf>,
    #[arg(long)]
    pub bitext: Option<PathBuf>,
    /// Drop-accounting report JSON.
    #[arg(long)]
    pub report: PathBuf,
    #[arg(long, value_enum)]
    pub format: Option<RecordFormat>,
    /// Worker threads for the per-record rules; order is preserved.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

fn assemble_config(args: &RunArgs) -> Result<FilterConfig> {
    let mut config = FilterConfig::default();
    let file: FilterConfigFile = match &args.config {
        Some(path) => serde_json::from_str(&fs::read_to_string(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
        None => FilterConfigFile::default(),
    };
    if let Some(v) = file.punct_threshold {
        config.punct_threshold = v;
    }
    if let Some(v) = file.max_subwords {
        config.max_subwords = v;
    }
    if let Some(v) = file.max_len_ratio {
        config.max_len_ratio = v;
    }
    if let Some(v) = file.core_char_threshold {
        config.core_char_threshold = v;
    }
    if let Some(v) = file.missing_table_policy {
        config.missing_table_policy = v;
    }
    if let Some(path) = &file.eval_blocklist {
        let sentences = fs::read_to_string(path)
            .with_context(|| format!("reading blocklist {}", path.display()))?;
        config = config.with_eval_blocklist(sentences.lines().filter(|l| !l.trim().is_empty()));
    }
    if let Some(catalog_path) = &args.catalog {
        let catalog = LanguageCatalog::load(catalog_path, args.bitext.as_deref())?;
        config = config.with_core_tables_from(&catalog);
    }
    if let Some(overrides) = &file.core_char_scripts {
        for (iso, scripts) in overrides {
            config
                .core_char_tables
                .insert(iso.clone(), CoreCharTable::from_scripts(scripts));
        }
    }
    Ok(config)
}

pub fn run(args: RunArgs) -> Result<()> {
    let config = assemble_config(&args)?;
    let config_snapshot = serde_json::json!({
        "punct_threshold": config.punct_threshold,
        "max_subwords": config.max_subwords,
        "max_len_ratio": config.max_len_ratio,
        "core_char_threshold": config.core_char_threshold,
        "blocklist_size": config.eval_blocklist.len(),
        "workers": args.workers,
    });

    let mut reader: Box<dyn BufRead> = match &args.input {
        Some(path) => Box::new(BufReader::new(
            fs::File::open(path).with_context(|| format!("opening {}", path.display()))?,
        )),
        None => Box::new(BufReader::new(std::io::stdin())),
    };
    let mut writer: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(fs::File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    };
    let in_format = RecordFormat::detect(args.format, args.input.as_deref());
    let out_format = RecordFormat::detect(args.format, args.output.as_deref());

    let mut chain = FilterChain::new(config);

    if args.workers <= 1 {
        records::for_each_record(&mut reader, in_format, |_line, record| {
            if let Some(kept) = chain.process(record)? {
                records::write_record(&mut writer, &kept, out_format, None)?;
            }
            Ok(())
        })?;
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(args.workers)
            .build()?;
        let mut line_no = 0usize;
        loop {
            let batch = records::read_batch(&mut reader, BATCH_SIZE, &mut line_no)?;
            if batch.is_empty() {
                break;
            }
            // Parse + pure per-record rules in parallel; par_iter keeps
            // input order in the collected results.
            let outcomes: Vec<Result<(BitextRecord, FilterOutcome)>> = pool.install(|| {
                batch
                    .par_iter()
                    .map(|(line, raw)| {
                        let record = records::parse_record(*line, raw, in_format)?;
                        let outcome = filter_record(&record, chain.config(), &WhitespaceCounter)?;
                        Ok((record, outcome))
                    })
                    .collect()
            });
            for item in outcomes {
                let (record, outcome) = item?;
                if let Some(kept) = chain.process_prefiltered(record, outcome)? {
                    records::write_record(&mut writer, &kept, out_format, None)?;
                }
            }
        }
    }
    writer.flush()?;

    let report = chain.finish();
    if !report.is_conserved() {
        return Err(anyhow!("internal error: filter report does not conserve counts"));
    }
    fs::write(&args.report, serde_json::to_string_pretty(&report)? + "\n")?;
    eprintln!(
        "filter: {} in, {} kept, {} dropped",
        report.input_count,
        report.kept_count,
        report.total_drops()
    );

    let m = ManifestBuilder::new("filter run")
        .input_opt(args.input.as_ref())?
        .input_opt(args.config.as_ref())?
        .input_opt(args.catalog.as_ref())?
        .input_opt(args.bitext.as_ref())?
        .config(config_snapshot)
        .output_opt(args.output.as_ref())
        .output(&args.report)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.report))?;
    Ok(())
}
