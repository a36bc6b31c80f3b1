use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use mmt_core::io::parse_tsv;
use mmt_core::shard::{self, ShardPlan, DEFAULT_TOTAL_SHARDS};

use crate::manifest::{self, ManifestBuilder};
use crate::records::{self, RecordFormat};

#[derive(Args)]
pub struct PlanArgs {
    /// Per-language sentence counts as TSV (lang, sentences).
    #[arg(long)]
    pub sizes: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOTAL_SHARDS)]
    pub total_shards: u32,
    #[arg(long)]
    pub target_shard_size: u64,
    /// Shard plan JSON.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn plan(args: PlanArgs) -> Result<()> {
    let content = fs::read_to_string(&args.sizes)?;
    let path = args.sizes.display().to_string();
    let mut sizes: BTreeMap<String, u64> = BTreeMap::new();
    for row in parse_tsv(&content, &path, 2)? {
        let n: u64 = row.fields[1]
            .parse()
            .with_context(|| format!("{path}:{}: bad sentence count", row.line))?;
        sizes.insert(row.fields[0].to_string(), n);
    }
    let plan = shard::plan_shards(&sizes, args.total_shards, args.target_shard_size)?;
    fs::write(&args.out, serde_json::to_string_pretty(&plan)? + "\n")?;
    println!(
        "planned {} languages over {} shards",
        plan.per_language.len(),
        plan.total_shards
    );

    let m = ManifestBuilder::new("shard plan")
        .input(&args.sizes)?
        .config(serde_json::json!({
            "total_shards": args.total_shards,
            "target_shard_size": args.target_shard_size,
        }))
        .output(&args.out)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}

#[derive(Args)]
pub struct AssignArgs {
    /// Shard plan JSON from `shard plan`.
    #[arg(long)]
    pub plan: PathBuf,
    /// Record stream; standard input when omitted.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Annotated records; standard output when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum)]
    pub format: Option<RecordFormat>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn assign(args: AssignArgs) -> Result<()> {
    let plan: ShardPlan = serde_json::from_str(&fs::read_to_string(&args.plan)?)
        .with_context(|| format!("parsing {}", args.plan.display()))?;

    let mut reader: Box<dyn BufRead> = match &args.input {
        Some(path) => Box::new(BufReader::new(fs::File::open(path)?)),
        None => Box::new(BufReader::new(std::io::stdin())),
    };
    let mut writer: Box<dyn Write> = match &args.output {
        Some(path) => Box::new(BufWriter::new(fs::File::create(path)?)),
        None => Box::new(BufWriter::new(std::io::stdout())),
    };
    let in_format = RecordFormat::detect(args.format, args.input.as_deref());
    let out_format = RecordFormat::detect(args.format, args.output.as_deref());

    let mut count = 0u64;
    records::for_each_record(&mut reader, in_format, |_line, record| {
        let assignment = shard::assign_record(
            &record.src_lang,
            &record.tgt_lang,
            &record.src_text,
            &plan,
            args.seed,
        )?;
        records::write_record(&mut writer, &record, out_format, Some(assignment.local))?;
        count += 1;
        Ok(())
    })?;
    writer.flush()?;
    eprintln!("assigned {count} records");

    let m = ManifestBuilder::new("shard assign")
        .input(&args.plan)?
        .input_opt(args.input.as_ref())?
        .seed(Some(args.seed))
        .output_opt(args.output.as_ref())
        .build();
    manifest::write(&m, args.manifest.as_ref(), args.output.as_deref())?;
    Ok(())
}
