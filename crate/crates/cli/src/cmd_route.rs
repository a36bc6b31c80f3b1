use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use mmt_core::groups::GroupingPlan;
use mmt_core::router::{self, RouteQuery, Side};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::manifest::{self, ManifestBuilder};

#[derive(Args)]
pub struct SimulateArgs {
    /// Grouping plan JSON (as written by `groups build`).
    #[arg(long)]
    pub grouping: PathBuf,
    /// Re-routing rate in [0, 1).
    #[arg(long, value_parser = crate::parse_rate)]
    pub rate: f64,
    /// Number of routing decisions to simulate.
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub seed: u64,
    /// Decision JSONL output.
    #[arg(long)]
    pub out: PathBuf,
    /// Summary JSON (also printed to stdout).
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

pub fn simulate(args: SimulateArgs) -> Result<()> {
    let grouping: GroupingPlan = serde_json::from_str(&fs::read_to_string(&args.grouping)?)
        .with_context(|| format!("parsing {}", args.grouping.display()))?;
    let langs: Vec<String> = grouping
        .languages()
        .into_iter()
        .map(|s| s.to_string())
        .collect();
    if langs.len() < 2 {
        bail!("grouping must cover at least two languages");
    }

    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let mut writer = BufWriter::new(fs::File::create(&args.out)?);
    let mut rerouted = 0u64;
    let mut histogram: BTreeMap<usize, u64> = BTreeMap::new();

    for _ in 0..args.n {
        let src = &langs[rng.gen_range(0..langs.len())];
        let tgt = loop {
            let t = &langs[rng.gen_range(0..langs.len())];
            if t != src {
                break t;
            }
        };
        let side = if rng.gen::<bool>() {
            Side::Encoder
        } else {
            Side::Decoder
        };
        let query = RouteQuery::new(src, tgt, side);
        let decision = router::route(&query, &grouping, args.rate, &mut rng)?;
        if decision.rerouted {
            rerouted += 1;
        }
        *histogram.entry(decision.group_id).or_default() += 1;
        writeln!(
            writer,
            "{}",
            serde_json::json!({
                "src": src,
                "tgt": tgt,
                "side": side,
                "assigned_group": decision.assigned_group_id,
                "group": decision.group_id,
                "rerouted": decision.rerouted,
            })
        )?;
    }
    writer.flush()?;

    let summary = serde_json::json!({
        "samples": args.n,
        "rate": args.rate,
        "empirical_reroute_rate": if args.n == 0 { 0.0 } else { rerouted as f64 / args.n as f64 },
        "group_histogram": histogram
            .iter()
            .map(|(k, v)| (k.to_string(), *v))
            .collect::<BTreeMap<String, u64>>(),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = &args.summary {
        fs::write(path, serde_json::to_string_pretty(&summary)? + "\n")?;
    }

    let m = ManifestBuilder::new("route simulate")
        .input(&args.grouping)?
        .config(serde_json::json!({ "rate": args.rate, "n": args.n }))
        .seed(Some(args.seed))
        .output(&args.out)
        .output_opt(args.summary.as_ref())
        .build();
    manifest::write(&m, args.manifest.as_ref(), Some(&args.out))?;
    Ok(())
}
