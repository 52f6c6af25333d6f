//! `hpb` — seeded benchmark sweeps and beam-pattern dumps on top of hpb-core.

use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use hpb_core::config::SystemConfig;
use hpb_core::harness::{
    Algorithm, ExperimentSpec, SweepVariable, TrialOptions, pattern_csv, run_sweep, write_results,
};

#[derive(Parser)]
#[command(name = "hpb", version, about = "RIS passive-beamforming benchmark runner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo sweep and write the aggregated rates as CSV.
    Run(RunArgs),
    /// Dump one surface's reflection gain over a direction-offset grid.
    Pattern(PatternArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (flat TOML, see paper_v.cfg); built-in baseline if omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated algorithm list; all five when omitted.
    #[arg(long, value_delimiter = ',', value_parser = parse_algo)]
    algos: Vec<Algorithm>,
    /// Quantity varied across sweep points: paths, elements or ris.
    #[arg(long, value_parser = parse_sweep)]
    sweep: SweepVariable,
    /// Comma-separated sweep values (total elements L² for `elements`).
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<usize>,
    /// Channel realizations per sweep point.
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Master seed; per-trial seeds are derived by index.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    /// Use 1000 realizations per point (overrides --trials).
    #[arg(long)]
    full_scale: bool,
    /// Write wall times as 0 so repeated runs are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct PatternArgs {
    /// Elements per surface side (even).
    #[arg(long, default_value_t = 40)]
    side: usize,
    /// Element spacing in wavelengths.
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    /// Offsets run over [-range, range] on both axes.
    #[arg(long, default_value_t = 2.0)]
    range: f64,
    /// Grid points per axis.
    #[arg(long, default_value_t = 201)]
    points: usize,
    /// Output path; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: hpb_core::Error| e.to_string())
}

fn parse_sweep(s: &str) -> Result<SweepVariable, String> {
    s.parse().map_err(|e: hpb_core::Error| e.to_string())
}

fn run(args: RunArgs) -> anyhow::Result<()> {
    let base = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            SystemConfig::from_config_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?
        }
        None => SystemConfig::baseline(1, 40, 8),
    };
    let algorithms = if args.algos.is_empty() {
        Algorithm::ALL.to_vec()
    } else {
        args.algos.clone()
    };
    let spec = ExperimentSpec {
        base,
        sweep: args.sweep,
        values: args.values.clone(),
        algorithms,
        trials: if args.full_scale { 1000 } else { args.trials },
        master_seed: args.seed,
        opts: TrialOptions {
            measure_time: !args.no_timing,
            ..TrialOptions::default()
        },
    };
    let rows = run_sweep(&spec).context("running sweep")?;
    write_results(&rows, &args.out).context("writing results")?;
    eprintln!(
        "wrote {} rows ({} sweep points x {} algorithms, {} trials each) to {}",
        rows.len(),
        spec.values.len(),
        spec.algorithms.len(),
        spec.trials,
        args.out.display()
    );
    Ok(())
}

fn pattern(args: PatternArgs) -> anyhow::Result<()> {
    anyhow::ensure!(
        args.side >= 2 && args.side % 2 == 0,
        "--side must be even and >= 2"
    );
    anyhow::ensure!(args.points >= 2, "--points must be >= 2");
    anyhow::ensure!(
        args.delta > 0.0 && args.range > 0.0,
        "--delta and --range must be positive"
    );
    let csv = pattern_csv(args.side, args.delta, args.range, args.points);
    match &args.out {
        Some(path) => std::fs::write(path, csv)
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Pattern(args) => pattern(args),
    }
}
