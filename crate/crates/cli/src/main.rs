//! Command-line front end: train a policy, sweep the weight grid,
//! generate a synthetic day, or validate a configuration.
//!
//! Exit codes: 0 on success, 2 for invalid input (bad flags,
//! configuration, or data file contents), 3 for I/O failures. All
//! validation happens before any output file is created.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use morlgrid::config::RunConfig;
use morlgrid::learner::{ScalarizationKind, ScalarizationSpec};
use morlgrid::model::NUM_OBJECTIVES;
use morlgrid::report::fmt_sig;
use morlgrid::{env, learner, pareto, report, Error, Result};

#[derive(Parser)]
#[command(
    name = "morlgrid",
    version,
    about = "Multi-objective pricing and storage dispatch for microgrid fleets"
)]
struct Cli {
    /// TOML run configuration; built-in defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Output directory; overrides the configuration's output.dir.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed override: the learner seed for train and sweep, the
    /// generator seed for synth.
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one scalarized policy and write its convergence log,
    /// greedy policy table, and evaluation trajectory.
    Train(TrainArgs),
    /// Train one policy per weight-grid vector, keep the non-dominated
    /// returns, and write the archive with its fair point marked.
    Sweep(SweepArgs),
    /// Generate a synthetic day profile for the configured fleet.
    Synth,
    /// Check the configuration and its day data, writing nothing.
    ValidateConfig,
}

#[derive(Args)]
struct TrainArgs {
    /// Objective weights as `w,s,g,a`; nonnegative, summing to 1.
    #[arg(long, value_name = "W,S,G,A")]
    weights: Option<String>,

    /// Scalarization kind: linear or chebyshev.
    #[arg(long, value_name = "KIND")]
    scalarization: Option<String>,
}

#[derive(Args)]
struct SweepArgs {
    /// Weight-grid granularity H; one run per simplex point i/H.
    #[arg(long, value_name = "H")]
    grid: Option<usize>,

    /// Scalarization kind: linear or chebyshev.
    #[arg(long, value_name = "KIND")]
    scalarization: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_validation() { 2 } else { 3 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    let out_dir = cli.out.clone().unwrap_or_else(|| config.output.dir.clone());
    match &cli.command {
        Command::Train(args) => cmd_train(&cli, &config, args, &out_dir),
        Command::Sweep(args) => cmd_sweep(&cli, &config, args, &out_dir),
        Command::Synth => cmd_synth(&cli, &config, &out_dir),
        Command::ValidateConfig => cmd_validate(&config),
    }
}

/// Parses `w,s,g,a`; distribution constraints are checked by the
/// scalarization spec afterwards.
fn parse_weights(text: &str) -> Result<[f64; NUM_OBJECTIVES]> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != NUM_OBJECTIVES {
        return Err(Error::InvalidInput(format!(
            "--weights needs {NUM_OBJECTIVES} comma-separated values, got {}",
            parts.len()
        )));
    }
    let mut weights = [0.0; NUM_OBJECTIVES];
    for (slot, part) in weights.iter_mut().zip(&parts) {
        *slot = part.trim().parse().map_err(|_| {
            Error::InvalidInput(format!("--weights entry {:?} is not a number", part.trim()))
        })?;
    }
    Ok(weights)
}

/// Resolves the scalarization from the configuration plus any CLI
/// overrides.
fn resolve_spec(
    config: &RunConfig,
    kind_override: &Option<String>,
    weights_override: &Option<String>,
) -> Result<ScalarizationSpec> {
    let kind = match kind_override {
        Some(text) => text.parse::<ScalarizationKind>()?,
        None => config.scalarization.kind,
    };
    let weights = match weights_override {
        Some(text) => parse_weights(text)?,
        None => config.scalarization.weights,
    };
    ScalarizationSpec::new(kind, weights, config.scalarization.utopian_margin)
}

fn create_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| {
        Error::Io(std::io::Error::new(
            e.kind(),
            format!("{}: {e}", dir.display()),
        ))
    })
}

fn print_return(label: &str, r: morlgrid::model::ObjectiveVector) {
    println!(
        "{label}: Fw={} Fs={} Fg={} Fa={}",
        fmt_sig(r.w),
        fmt_sig(r.s),
        fmt_sig(r.g),
        fmt_sig(r.a)
    );
}

fn cmd_train(cli: &Cli, config: &RunConfig, args: &TrainArgs, out_dir: &Path) -> Result<()> {
    let system = config.system()?;
    let day = config.load_day()?;
    let mut params = config.learner_params()?;
    if let Some(seed) = cli.seed {
        params.rng_seed = seed;
    }
    let spec = resolve_spec(config, &args.scalarization, &args.weights)?;

    create_out_dir(out_dir)?;
    let outcome = learner::train(&system, &day, &spec, &params)?;
    let evaluation = env::rollout(&outcome.policy, &day, &system)?;

    report::write_convergence(&out_dir.join("convergence.csv"), &outcome.log)?;
    report::write_policy(&out_dir.join("policy.csv"), &outcome.policy)?;
    report::write_trajectory(&out_dir.join("trajectory.csv"), &evaluation)?;

    println!(
        "trained {} policy: {} episodes, seed {}",
        spec.kind, params.episodes, params.rng_seed
    );
    print_return("episode return", evaluation.episode_return);
    println!(
        "wrote {}",
        ["convergence.csv", "policy.csv", "trajectory.csv"]
            .map(|name| out_dir.join(name).display().to_string())
            .join(", ")
    );
    Ok(())
}

fn cmd_sweep(cli: &Cli, config: &RunConfig, args: &SweepArgs, out_dir: &Path) -> Result<()> {
    let system = config.system()?;
    let day = config.load_day()?;
    let mut params = config.learner_params()?;
    if let Some(seed) = cli.seed {
        params.rng_seed = seed;
    }
    let template = resolve_spec(config, &args.scalarization, &None)?;
    let h = args.grid.unwrap_or(config.sweep.grid);
    let num_runs = pareto::weight_grid(h)?.len();

    create_out_dir(out_dir)?;
    let outcome = pareto::sweep(&system, &day, &template, h, &params)?;
    let archive = &outcome.archive;
    let fair = archive.fair_point_index()?;

    report::write_archive(&out_dir.join("archive.csv"), archive)?;
    for (i, entry) in archive.entries().iter().enumerate() {
        let evaluation = env::rollout(&entry.policy, &day, &system)?;
        report::write_trajectory(&out_dir.join(format!("trajectory_{i:03}.csv")), &evaluation)?;
    }

    println!(
        "swept {num_runs} weight vectors (grid {h}, {} scalarization, base seed {})",
        template.kind, params.rng_seed
    );
    println!(
        "archive keeps {} non-dominated entries; fair point is entry {fair}",
        archive.len()
    );
    let entry = &archive.entries()[fair];
    println!(
        "fair weights: {}",
        entry.weights.map(fmt_sig).join(",")
    );
    print_return("fair return", entry.episode_return);
    println!(
        "wrote {} and {} trajectories",
        out_dir.join("archive.csv").display(),
        archive.len()
    );
    Ok(())
}

fn cmd_synth(cli: &Cli, config: &RunConfig, out_dir: &Path) -> Result<()> {
    let system = config.system()?;
    let seed = cli.seed.unwrap_or(config.data.seed);
    let day = env::synth_day(seed, &system);

    create_out_dir(out_dir)?;
    let path = out_dir.join("timeseries.csv");
    report::write_timeseries(&path, &day)?;
    println!(
        "wrote {} ({} microgrids, seed {seed})",
        path.display(),
        day.series.len()
    );
    Ok(())
}

fn cmd_validate(config: &RunConfig) -> Result<()> {
    config.validate()?;
    let day = config.load_day()?;
    println!(
        "configuration ok: {} microgrids, day data ready",
        day.series.len()
    );
    Ok(())
}
