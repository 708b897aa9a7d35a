use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use stickydp::commands::{self, FitArgs, IngestArgs, PriorSampleArgs, SimulateArgs, SummarizeArgs, SummaryQuery};
use stickydp::emissions::ChannelKind;
use stickydp::error::{Error, Result};
use stickydp::io::{read_text, LegislativeSchema, OutputBatch};
use stickydp::simulation::{ChannelLayout, Regime};

#[derive(Parser)]
#[command(name = "stickydp", version, about = "Sticky Dirichlet-process mixture for panel data")]
struct Cli {
    /// Output directory; overrides `output.dir` in a run config [default: stickydp-out].
    #[arg(long, global = true, env = "STICKYDP_OUT_DIR")]
    out_dir: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, env = "STICKYDP_WORKERS", default_value_t = 0)]
    workers: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    StructuralBreak,
    GradualChange,
    PriorPredictive,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic panel with known memberships.
    Simulate(SimulateCmd),
    /// Run the sampler on a panel.
    Fit(FitCmd),
    /// Summarize stored draws.
    Summarize(SummarizeCmd),
    /// Draw assignment matrices from the sequential prior.
    PriorSample(PriorSampleCmd),
    /// Collapse member-level legislative records into a panel.
    Ingest(IngestCmd),
}

#[derive(Args)]
struct SimulateCmd {
    #[arg(long, value_enum)]
    regime: RegimeArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Run config supplying priors (prior-predictive only).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    units: usize,
    #[arg(long, default_value_t = 10)]
    periods: usize,
    /// Channel as name:kind:size, e.g. votes:bernoulli:5 (prior-predictive only).
    #[arg(long = "channel")]
    channels: Vec<String>,
}

#[derive(Args)]
struct FitCmd {
    /// Panel file.
    #[arg(long, required_unless_present = "manifest")]
    dataset: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Re-run exactly what an earlier manifest records.
    #[arg(long, conflicts_with_all = ["dataset", "config", "seed", "chains"])]
    manifest: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    chains: Option<usize>,
}

#[derive(Args)]
struct SummarizeCmd {
    /// Draw files; chains are pooled.
    #[arg(long, required = true, num_args = 1..)]
    draws: Vec<PathBuf>,
    #[arg(long)]
    dataset: PathBuf,
    /// Query file (TOML) naming alignment series and co-clustering periods.
    #[arg(long)]
    query: Option<PathBuf>,
    /// Ground truth from `simulate`, for a recovery report.
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args)]
struct PriorSampleCmd {
    #[arg(long)]
    units: usize,
    #[arg(long)]
    periods: usize,
    #[arg(long, default_value_t = 1)]
    draws: usize,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Stickiness.
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct IngestCmd {
    /// CSV with columns congress,state,party,member,channel,value.
    #[arg(long)]
    records: PathBuf,
    /// State-to-region table, e.g. data/south_states.tsv.
    #[arg(long)]
    regions: Option<PathBuf>,
    #[arg(long, default_value_t = 73)]
    first: i64,
    #[arg(long, default_value_t = 92)]
    last: i64,
    /// Output panel file (default: <out-dir>/panel.tsv).
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_layout(spec: &str) -> Result<ChannelLayout> {
    let bad = || Error::param("channel", format!("`{spec}` is not name:kind:size"));
    let mut parts = spec.split(':');
    let (Some(name), Some(kind), Some(size), None) = (parts.next(), parts.next(), parts.next(), parts.next()) else {
        return Err(bad());
    };
    let kind = ChannelKind::parse(kind).ok_or_else(bad)?;
    let size = size.parse().map_err(|_| bad())?;
    Ok(ChannelLayout::new(name, kind, size))
}

fn report(batch: OutputBatch) -> Result<()> {
    for path in batch.commit()? {
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
            .map_err(|e| Error::param("workers", e.to_string()))?;
    }
    let workers = rayon::current_num_threads();
    let out_dir = |configured: Option<PathBuf>| {
        cli.out_dir.clone().or(configured).unwrap_or_else(|| PathBuf::from("stickydp-out"))
    };
    match cli.command {
        Command::Simulate(c) => {
            let run = commands::load_run_config(c.config.as_deref())?;
            let args = SimulateArgs {
                regime: match c.regime {
                    RegimeArg::StructuralBreak => Regime::StructuralBreak,
                    RegimeArg::GradualChange => Regime::GradualChange,
                    RegimeArg::PriorPredictive => Regime::PriorPredictive,
                },
                seed: c.seed,
                out_dir: out_dir(run.output.dir),
                n_units: c.units,
                n_periods: c.periods,
                layout: c.channels.iter().map(|s| parse_layout(s)).collect::<Result<_>>()?,
                config: run.sampler,
            };
            report(commands::simulate(&args)?.0)
        }
        Command::Fit(c) => {
            let args = if let Some(m) = &c.manifest {
                FitArgs::from_manifest(m, out_dir(None))?
            } else {
                let run = commands::load_run_config(c.config.as_deref())?;
                let mut config = run.sampler;
                if let Some(s) = c.seed {
                    config.seed = s;
                }
                if let Some(n) = c.chains {
                    config.chains = n;
                }
                FitArgs {
                    dataset: c.dataset.expect("clap requires a dataset without a manifest"),
                    config,
                    out_dir: out_dir(run.output.dir),
                    workers,
                }
            };
            let (batch, chains, manifest) = commands::fit(&args)?;
            for ch in &manifest.chains {
                log::info!(
                    "chain {}: {} draws, log-joint ESS {:.0}, truncation reached in {:.1}% of sweeps",
                    ch.chain,
                    ch.n_draws,
                    ch.ess_log_joint,
                    100.0 * ch.truncation_hit_rate
                );
            }
            drop(chains);
            report(batch)
        }
        Command::Summarize(c) => {
            let query = match &c.query {
                Some(p) => SummaryQuery::from_toml(&read_text(p)?, &p.display().to_string())?,
                None => SummaryQuery::default(),
            };
            report(commands::summarize(&SummarizeArgs {
                draws: c.draws,
                dataset: c.dataset,
                query,
                truth: c.truth,
                out_dir: out_dir(None),
            })?)
        }
        Command::PriorSample(c) => report(commands::prior_sample(&PriorSampleArgs {
            n_units: c.units,
            n_periods: c.periods,
            n_draws: c.draws,
            gamma: c.gamma,
            p: c.p,
            seed: c.seed,
            out_dir: out_dir(None),
        })?),
        Command::Ingest(c) => {
            let args = IngestArgs {
                records: c.records,
                regions: c.regions,
                schema: LegislativeSchema {
                    first_congress: c.first,
                    last_congress: c.last,
                    ..Default::default()
                },
                output: c.output.unwrap_or_else(|| out_dir(None).join("panel.tsv")),
            };
            report(commands::ingest(&args)?.0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
