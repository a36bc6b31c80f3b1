use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use mmt_core::catalog::LanguageCatalog;

use crate::manifest::{self, ManifestBuilder};

#[derive(Args)]
pub struct ValidateArgs {
    /// Catalog TSV (iso, name, family, scripts, grouping, is_bridge, mono_sentences).
    #[arg(long)]
    pub catalog: PathBuf,
    /// Companion bitext-count TSV (src, tgt, sentence_pairs).
    #[arg(long)]
    pub bitext: Option<PathBuf>,
    /// Pivot language iso.
    #[arg(long, default_value = "en")]
    pub english: String,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn validate(args: ValidateArgs) -> Result<()> {
    let catalog =
        LanguageCatalog::load_with_english(&args.catalog, args.bitext.as_deref(), &args.english)?;
    let bridges = catalog.bridges().count();
    println!(
        "ok: {} languages, {} groupings, {} bridges, pivot {}, hash {}",
        catalog.len(),
        catalog.groupings().len(),
        bridges,
        catalog.english_iso(),
        catalog.content_hash()
    );
    let m = ManifestBuilder::new("catalog validate")
        .input(&args.catalog)?
        .input_opt(args.bitext.as_ref())?
        .config(serde_json::json!({ "english": args.english }))
        .build();
    manifest::write(&m, args.manifest.as_ref(), None)?;
    Ok(())
}
