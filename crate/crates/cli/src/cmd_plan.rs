use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmt_core::catalog::LanguageCatalog;
use mmt_core::io::parse_tsv;
use mmt_core::mining::{
    self, MiningPlan, Strategy, BT_LIMIT, BT_SCORE_HI, BT_SCORE_LO,
};

use crate::manifest::{self, ManifestBuilder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum StrategyArg {
    Bridge,
    Random,
    RandomWithEn,
    Full,
}

#[derive(Args)]
pub struct BuildArgs {
    #[arg(long, value_enum)]
    pub strategy: StrategyArg,
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long)]
    pub bitext: Option<PathBuf>,
    /// Fraction of all pairs to leave unmined (random strategies).
    #[arg(long, value_parser = crate::parse_fraction)]
    pub sparsity: Option<f64>,
    /// RNG seed (required for random strategies).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Plan TSV output; a JSON sidecar lands next to it.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn build(args: BuildArgs) -> Result<()> {
    let catalog = LanguageCatalog::load(&args.catalog, args.bitext.as_deref())?;
    let plan = match args.strategy {
        StrategyArg::Bridge => mining::build_bridge_plan(&catalog)?,
        StrategyArg::Full => mining::build_full_plan(&catalog),
        StrategyArg::Random | StrategyArg::RandomWithEn => {
            let sparsity = args
                .sparsity
                .context("--sparsity is required for random strategies")?;
            let seed = args
                .seed
                .context("--seed is required for random strategies")?;
            let include_en = args.strategy == StrategyArg::RandomWithEn;
            mining::build_random_plan(&catalog, sparsity, include_en, seed)?
        }
    };

    fs::write(&args.out, plan.to_tsv()).with_context(|| format!("writing {:?}", args.out))?;
    let sidecar_path = args.out.with_extension("json");
    let sidecar = serde_json::to_string_pretty(&plan.sidecar_json(&catalog))?;
    fs::write(&sidecar_path, sidecar + "\n")?;
    println!(
        "plan: {} pairs, {} directions, sparsity {:.4}",
        plan.len(),
        plan.len() * 2,
        mining::sparsity(&plan, &catalog)
    );

    let m = ManifestBuilder::new("plan build")
        .input(&args.catalog)?
        .input_opt(args.bitext.as_ref())?
        .config(serde_json::json!({
            "strategy": format!("{:?}", args.strategy),
            "sparsity": args.sparsity,
        }))
        .seed(args.seed)
        .output(&args.out)
        .output(&sidecar_path)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}

#[derive(Args)]
pub struct SparsityArgs {
    /// Plan TSV (src, tgt).
    #[arg(long)]
    pub plan: PathBuf,
    #[arg(long)]
    pub catalog: PathBuf,
    #[arg(long)]
    pub bitext: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn sparsity(args: SparsityArgs) -> Result<()> {
    let catalog = LanguageCatalog::load(&args.catalog, args.bitext.as_deref())?;
    let content = fs::read_to_string(&args.plan)?;
    let plan = MiningPlan::from_tsv(
        &content,
        &args.plan.display().to_string(),
        Strategy::Full,
        None,
        &catalog,
    )?;
    plan.validate(&catalog)?;
    println!(
        "{}",
        serde_json::json!({
            "pairs": plan.len(),
            "directions": plan.len() * 2,
            "sparsity": mining::sparsity(&plan, &catalog),
        })
    );
    let m = ManifestBuilder::new("plan sparsity")
        .input(&args.plan)?
        .input(&args.catalog)?
        .input_opt(args.bitext.as_ref())?
        .build();
    manifest::write(&m, args.manifest.as_ref(), None)?;
    Ok(())
}

#[derive(Args)]
pub struct BtSelectArgs {
    /// Score table TSV (src, tgt, bleu).
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long, default_value_t = BT_SCORE_LO)]
    pub lo: f64,
    #[arg(long, default_value_t = BT_SCORE_HI)]
    pub hi: f64,
    #[arg(long, default_value_t = BT_LIMIT)]
    pub limit: usize,
    /// Selected directions as TSV (src, tgt).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn bt_select(args: BtSelectArgs) -> Result<()> {
    let content = fs::read_to_string(&args.scores)?;
    let path = args.scores.display().to_string();
    let mut scores = Vec::new();
    for row in parse_tsv(&content, &path, 3)? {
        let bleu: f64 = row.fields[2]
            .parse()
            .with_context(|| format!("{path}:{}: bad BLEU value", row.line))?;
        if !bleu.is_finite() || bleu < 0.0 {
            bail!("{path}:{}: BLEU must be finite and non-negative", row.line);
        }
        scores.push((
            (row.fields[0].to_string(), row.fields[1].to_string()),
            bleu,
        ));
    }
    let selection = mining::select_bt_directions(&scores, args.lo, args.hi, args.limit);
    let mut body = String::new();
    for (src, tgt) in &selection.directions {
        body.push_str(&format!("{src}\t{tgt}\n"));
    }
    fs::write(&args.out, body)?;
    println!("selected {} directions", selection.directions.len());

    let m = ManifestBuilder::new("bt select")
        .input(&args.scores)?
        .config(serde_json::json!({ "lo": args.lo, "hi": args.hi, "limit": args.limit }))
        .output(&args.out)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}
