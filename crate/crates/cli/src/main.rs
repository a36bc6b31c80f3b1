//! `mmt` — command-line interface for corpus planning: catalog validation,
//! mining plans, Sinkhorn-balanced pair sampling, bitext filtering, shard
//! planning, language grouping, and routing simulation.
//!
//! Exit codes: 0 success, 1 validation/data error (diagnostic on stderr),
//! 2 usage error.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod cmd_catalog;
mod cmd_ensemble;
mod cmd_filter;
mod cmd_groups;
mod cmd_plan;
mod cmd_route;
mod cmd_sampling;
mod cmd_shard;
mod manifest;
mod records;

fn parse_rate(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("rate must lie in [0, 1), got {v}"))
    }
}

fn parse_fraction(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("{s:?} is not a number"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("expected a fraction in [0, 1], got {v}"))
    }
}

#[derive(Parser)]
#[command(name = "mmt", version, about = "corpus planning toolkit for many-to-many translation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Language catalog operations.
    Catalog {
        #[command(subcommand)]
        command: CatalogCommand,
    },
    /// Mining-plan operations.
    Plan {
        #[command(subcommand)]
        command: PlanCommand,
    },
    /// Backtranslation direction selection.
    Bt {
        #[command(subcommand)]
        command: BtCommand,
    },
    /// Pair-matrix balancing and sampling.
    Sinkhorn {
        #[command(subcommand)]
        command: SinkhornCommand,
    },
    /// Temperature-rescale a count distribution.
    Rescale(RescaleArgs),
    /// Dictionary coverage per language.
    Coverage(CoverageArgs),
    /// Bitext filtering.
    Filter {
        #[command(subcommand)]
        command: FilterCommand,
    },
    /// Shard planning and record assignment.
    Shard {
        #[command(subcommand)]
        command: ShardCommand,
    },
    /// Language grouping for language-specific layers.
    Groups {
        #[command(subcommand)]
        command: GroupsCommand,
    },
    /// Routing simulation.
    Route {
        #[command(subcommand)]
        command: RouteCommand,
    },
    /// Log-probability ensembling.
    Ensemble {
        #[command(subcommand)]
        command: EnsembleCommand,
    },
}

#[derive(Subcommand)]
enum CatalogCommand {
    /// Load and validate a catalog, reporting summary statistics.
    Validate(cmd_catalog::ValidateArgs),
}

#[derive(Subcommand)]
enum PlanCommand {
    /// Build a mining plan (TSV plus JSON sidecar).
    Build(cmd_plan::BuildArgs),
    /// Report the sparsity of an existing plan.
    Sparsity(cmd_plan::SparsityArgs),
}

#[derive(Subcommand)]
enum BtCommand {
    /// Select backtranslation directions from a BLEU score table.
    Select(cmd_plan::BtSelectArgs),
}

#[derive(Subcommand)]
enum SinkhornCommand {
    /// Balance a pair-count matrix to temperature-rescaled marginals.
    Solve(cmd_sampling::SolveArgs),
    /// Balance and then draw language pairs from the result.
    Sample(cmd_sampling::SampleArgs),
}

#[derive(Args)]
struct RescaleArgs {
    #[command(flatten)]
    inner: cmd_sampling::RescaleArgs,
}

#[derive(Args)]
struct CoverageArgs {
    #[command(flatten)]
    inner: cmd_sampling::CoverageArgs,
}

#[derive(Subcommand)]
enum FilterCommand {
    /// Run the filter chain over a record stream.
    Run(cmd_filter::RunArgs),
}

#[derive(Subcommand)]
enum ShardCommand {
    /// Plan per-language shard counts and replication.
    Plan(cmd_shard::PlanArgs),
    /// Annotate a record stream with shard assignments.
    Assign(cmd_shard::AssignArgs),
}

#[derive(Subcommand)]
enum GroupsCommand {
    /// Build language groups from vocabulary profiles.
    Build(cmd_groups::BuildArgs),
}

#[derive(Subcommand)]
enum RouteCommand {
    /// Simulate routing decisions and report re-routing statistics.
    Simulate(cmd_route::SimulateArgs),
}

#[derive(Subcommand)]
enum EnsembleCommand {
    /// Combine per-token log-probability vectors.
    Combine(cmd_ensemble::CombineArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Catalog {
            command: CatalogCommand::Validate(args),
        } => cmd_catalog::validate(args),
        Command::Plan {
            command: PlanCommand::Build(args),
        } => cmd_plan::build(args),
        Command::Plan {
            command: PlanCommand::Sparsity(args),
        } => cmd_plan::sparsity(args),
        Command::Bt {
            command: BtCommand::Select(args),
        } => cmd_plan::bt_select(args),
        Command::Sinkhorn {
            command: SinkhornCommand::Solve(args),
        } => cmd_sampling::solve(args),
        Command::Sinkhorn {
            command: SinkhornCommand::Sample(args),
        } => cmd_sampling::sample(args),
        Command::Rescale(args) => cmd_sampling::rescale(args.inner),
        Command::Coverage(args) => cmd_sampling::coverage(args.inner),
        Command::Filter {
            command: FilterCommand::Run(args),
        } => cmd_filter::run(args),
        Command::Shard {
            command: ShardCommand::Plan(args),
        } => cmd_shard::plan(args),
        Command::Shard {
            command: ShardCommand::Assign(args),
        } => cmd_shard::assign(args),
        Command::Groups {
            command: GroupsCommand::Build(args),
        } => cmd_groups::build(args),
        Command::Route {
            command: RouteCommand::Simulate(args),
        } => cmd_route::simulate(args),
        Command::Ensemble {
            command: EnsembleCommand::Combine(args),
        } => cmd_ensemble::combine(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
