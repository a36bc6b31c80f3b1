use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmt_core::groups::{
    self, VocabProfile, DEFAULT_BALANCE_SLACK, DEFAULT_SINGLETON_THRESHOLD,
    DEFAULT_TARGET_CLUSTERS, DEFAULT_TOP_TOKENS,
};
use mmt_core::io::parse_tsv;

use crate::manifest::{self, ManifestBuilder};

#[derive(Args)]
pub struct BuildArgs {
    /// Directory of per-language token-frequency TSVs (`<iso>.tsv`, rows
    /// `token  count`).
    #[arg(long)]
    pub profiles: PathBuf,
    /// Per-language total sentence counts as TSV (lang, sentences).
    #[arg(long)]
    pub sizes: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SINGLETON_THRESHOLD)]
    pub singleton_threshold: u64,
    #[arg(long, default_value_t = DEFAULT_TARGET_CLUSTERS)]
    pub target_clusters: usize,
    #[arg(long, default_value_t = DEFAULT_BALANCE_SLACK)]
    pub balance_slack: f64,
    #[arg(long, default_value_t = DEFAULT_TOP_TOKENS)]
    pub top_tokens: usize,
    /// Grouping JSON: groups with member isos and data mass.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn build(args: BuildArgs) -> Result<()> {
    let sizes_content = fs::read_to_string(&args.sizes)?;
    let sizes_path = args.sizes.display().to_string();
    let mut sizes: BTreeMap<String, u64> = BTreeMap::new();
    for row in parse_tsv(&sizes_content, &sizes_path, 2)? {
        let n: u64 = row.fields[1]
            .parse()
            .with_context(|| format!("{sizes_path}:{}: bad sentence count", row.line))?;
        sizes.insert(row.fields[0].to_string(), n);
    }

    let mut profiles = Vec::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(&args.profiles)
        .with_context(|| format!("reading {}", args.profiles.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some("tsv"))
        .collect();
    entries.sort();
    for path in &entries {
        let iso = path
            .file_stem()
            .and_then(|s| s.to_str())
            .context("profile file name is not valid UTF-8")?
            .to_string();
        let Some(&total) = sizes.get(&iso) else {
            bail!("profile {iso:?} has no entry in {sizes_path}");
        };
        let content = fs::read_to_string(path)?;
        let tsv_path = path.display().to_string();
        let mut counts = Vec::new();
        for row in parse_tsv(&content, &tsv_path, 2)? {
            let c: u64 = row.fields[1]
                .parse()
                .with_context(|| format!("{tsv_path}:{}: bad token count", row.line))?;
            counts.push((row.fields[0].to_string(), c));
        }
        profiles.push(VocabProfile::from_token_counts(
            &iso,
            counts,
            args.top_tokens,
            total,
        ));
    }

    let plan = groups::build_groups(
        &profiles,
        args.singleton_threshold,
        args.target_clusters,
        args.balance_slack,
    )?;

    let masses: Vec<u64> = plan
        .groups
        .iter()
        .map(|g| g.iter().map(|iso| sizes.get(iso).copied().unwrap_or(0)).sum())
        .collect();
    let mut out_json = serde_json::to_value(&plan)?;
    out_json["masses"] = serde_json::json!(masses);
    fs::write(&args.out, serde_json::to_string_pretty(&out_json)? + "\n")?;
    println!("built {} groups from {} profiles", plan.k, profiles.len());

    let mut builder = ManifestBuilder::new("groups build")
        .input(&args.sizes)?
        .config(serde_json::json!({
            "singleton_threshold": args.singleton_threshold,
            "target_clusters": args.target_clusters,
            "balance_slack": args.balance_slack,
            "top_tokens": args.top_tokens,
        }))
        .output(&args.out);
    for path in &entries {
        builder = builder.input(path)?;
    }
    manifest::write(&builder.build(), args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}
