use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmt_core::io::parse_tsv;
use mmt_core::sampling::{
    self, MarginalTarget, PairMassMatrix, PairSampler, SinkhornResult, DEFAULT_MAX_ITERATIONS,
    DEFAULT_TEMPERATURE, DEFAULT_TOLERANCE,
};

use crate::manifest::{self, ManifestBuilder};

/// Shared inputs for `sinkhorn solve` and `sinkhorn sample`.
#[derive(Args)]
pub struct BalanceArgs {
    /// Pair-count TSV (src, tgt, count), unordered pairs listed once.
    #[arg(long)]
    pub pairs: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
    pub temperature: f64,
    #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iter: usize,
    /// Optional per-language mass TSV (lang, weight) replacing the totals
    /// derived from the pair counts; the temperature still applies.
    #[arg(long)]
    pub marginals: Option<PathBuf>,
}

fn load_pair_matrix(args: &BalanceArgs) -> Result<(PairMassMatrix, MarginalTarget)> {
    let content = fs::read_to_string(&args.pairs)?;
    let path = args.pairs.display().to_string();
    let mut pairs = Vec::new();
    let mut langs = BTreeSet::new();
    for row in parse_tsv(&content, &path, 3)? {
        let count: f64 = row.fields[2]
            .parse()
            .with_context(|| format!("{path}:{}: bad count", row.line))?;
        langs.insert(row.fields[0].to_string());
        langs.insert(row.fields[1].to_string());
        pairs.push((
            row.fields[0].to_string(),
            row.fields[1].to_string(),
            count,
        ));
    }
    let langs: Vec<String> = langs.into_iter().collect();
    let matrix = PairMassMatrix::from_pair_counts(langs, &pairs)?;

    let target = match &args.marginals {
        None => matrix.default_target(args.temperature)?,
        Some(mpath) => {
            let content = fs::read_to_string(mpath)?;
            let path = mpath.display().to_string();
            let mut weights: BTreeMap<String, f64> = BTreeMap::new();
            for row in parse_tsv(&content, &path, 2)? {
                let w: f64 = row.fields[1]
                    .parse()
                    .with_context(|| format!("{path}:{}: bad weight", row.line))?;
                weights.insert(row.fields[0].to_string(), w);
            }
            let counts: Vec<f64> = matrix
                .langs()
                .iter()
                .map(|iso| weights.get(iso).copied().unwrap_or(0.0))
                .collect();
            sampling::temperature_rescale(&counts, args.temperature)?
        }
    };
    Ok((matrix, target))
}

fn matrix_tsv(result: &SinkhornResult) -> String {
    let langs = result.langs();
    let mut out = String::new();
    for (i, j, p) in result.nonzero_entries() {
        out.push_str(&format!("{}\t{}\t{}\n", langs[i], langs[j], p));
    }
    out
}

#[derive(Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub balance: BalanceArgs,
    /// Balanced matrix as TSV (src, tgt, probability), nonzero cells only.
    #[arg(long)]
    pub out: PathBuf,
    /// Convergence diagnostics JSON (defaults next to --out).
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn solve(args: SolveArgs) -> Result<()> {
    let (matrix, target) = load_pair_matrix(&args.balance)?;
    let result = sampling::sinkhorn_balance(&matrix, &target, args.balance.tol, args.balance.max_iter)?;

    fs::write(&args.out, matrix_tsv(&result))?;
    let diag_path = args
        .diagnostics
        .clone()
        .unwrap_or_else(|| args.out.with_extension("diagnostics.json"));
    fs::write(
        &diag_path,
        serde_json::to_string_pretty(&result.diagnostics_json())? + "\n",
    )?;

    let m = ManifestBuilder::new("sinkhorn solve")
        .input(&args.balance.pairs)?
        .input_opt(args.balance.marginals.as_ref())?
        .config(serde_json::json!({
            "temperature": args.balance.temperature,
            "tol": args.balance.tol,
            "max_iter": args.balance.max_iter,
        }))
        .output(&args.out)
        .output(&diag_path)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;

    if !result.converged {
        bail!(
            "did not converge within {} iterations (max marginal error {:.3e}); diagnostics at {}",
            result.iterations,
            result.max_marginal_error,
            diag_path.display()
        );
    }
    println!(
        "converged in {} iterations, max marginal error {:.3e}",
        result.iterations, result.max_marginal_error
    );
    Ok(())
}

#[derive(Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub balance: BalanceArgs,
    #[arg(long)]
    pub seed: u64,
    /// Number of pairs to draw.
    #[arg(long)]
    pub count: usize,
    /// Drawn ordered pairs as TSV (src, tgt).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn sample(args: SampleArgs) -> Result<()> {
    let (matrix, target) = load_pair_matrix(&args.balance)?;
    let result = sampling::sinkhorn_balance(&matrix, &target, args.balance.tol, args.balance.max_iter)?;
    if !result.converged {
        bail!(
            "did not converge within {} iterations (max marginal error {:.3e})",
            result.iterations,
            result.max_marginal_error
        );
    }
    let mut sampler = PairSampler::new(&result, args.seed)?;
    let mut body = String::new();
    for _ in 0..args.count {
        let (src, tgt) = sampler.draw_isos();
        body.push_str(&format!("{src}\t{tgt}\n"));
    }
    fs::write(&args.out, body)?;
    println!("drew {} pairs", args.count);

    let m = ManifestBuilder::new("sinkhorn sample")
        .input(&args.balance.pairs)?
        .input_opt(args.balance.marginals.as_ref())?
        .config(serde_json::json!({
            "temperature": args.balance.temperature,
            "tol": args.balance.tol,
            "max_iter": args.balance.max_iter,
            "count": args.count,
        }))
        .seed(Some(args.seed))
        .output(&args.out)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}

#[derive(Args)]
pub struct RescaleArgs {
    /// Count TSV (lang, count).
    #[arg(long)]
    pub counts: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TEMPERATURE)]
    pub temperature: f64,
    /// Rescaled distribution as TSV (lang, probability).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn rescale(args: RescaleArgs) -> Result<()> {
    let content = fs::read_to_string(&args.counts)?;
    let path = args.counts.display().to_string();
    let mut langs = Vec::new();
    let mut counts = Vec::new();
    for row in parse_tsv(&content, &path, 2)? {
        let c: f64 = row.fields[1]
            .parse()
            .with_context(|| format!("{path}:{}: bad count", row.line))?;
        if c < 0.0 {
            bail!("{path}:{}: counts must be non-negative", row.line);
        }
        langs.push(row.fields[0].to_string());
        counts.push(c);
    }
    let target = sampling::temperature_rescale(&counts, args.temperature)?;
    let mut body = String::new();
    for (lang, p) in langs.iter().zip(&target.probabilities) {
        body.push_str(&format!("{lang}\t{p}\n"));
    }
    fs::write(&args.out, body)?;

    let m = ManifestBuilder::new("rescale")
        .input(&args.counts)?
        .config(serde_json::json!({ "temperature": args.temperature }))
        .output(&args.out)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}

#[derive(Args)]
pub struct CoverageArgs {
    /// Dictionary file, one token per line.
    #[arg(long)]
    pub dictionary: PathBuf,
    /// Token multisets as TSV (lang, token, count).
    #[arg(long)]
    pub tokens: PathBuf,
    /// Coverage as TSV (lang, fraction).
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn coverage(args: CoverageArgs) -> Result<()> {
    let dict: BTreeSet<String> = fs::read_to_string(&args.dictionary)?
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_string())
        .collect();

    let content = fs::read_to_string(&args.tokens)?;
    let path = args.tokens.display().to_string();
    let mut corpus: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for row in parse_tsv(&content, &path, 3)? {
        let count: u64 = row.fields[2]
            .parse()
            .with_context(|| format!("{path}:{}: bad count", row.line))?;
        *corpus
            .entry(row.fields[0].to_string())
            .or_default()
            .entry(row.fields[1].to_string())
            .or_default() += count;
    }
    let cov = sampling::dictionary_coverage(&dict, &corpus)?;
    let mut body = String::new();
    for (lang, fraction) in &cov {
        body.push_str(&format!("{lang}\t{fraction}\n"));
    }
    fs::write(&args.out, body)?;

    let m = ManifestBuilder::new("coverage")
        .input(&args.dictionary)?
        .input(&args.tokens)?
        .output(&args.out)
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}
