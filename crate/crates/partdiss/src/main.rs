//! Experiment driver: loads a JSON config, runs the experiment named by the subcommand,
//! and writes CSV outputs plus a hashing manifest.
//!
//! Exit codes: 0 success, 1 configuration problem, 2 validator FAIL verdict, 3 blow-up.

mod config;
mod error;
mod experiments;
mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use partdiss_core::noise::Channel;

use config::RunConfig;
use error::{CliError, CliResult};
use experiments::RunOutput;

#[derive(Parser)]
#[command(name = "partdiss", version, about = "Partly dissipative stochastic dynamics experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for ensemble jobs (default: logical cores). Outputs do not depend
    /// on this value.
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory (default: the config's output.directory, then ./out).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one trajectory and record norm series.
    Simulate(RunArgs),
    /// Evolve an initial ball from pullback times -t to 0 and tabulate endpoint distances.
    Pullback(RunArgs),
    /// Estimate the absorbing radius over a ladder of initial-ball sizes.
    Absorb(RunArgs),
    /// Track the damped component's regular/decaying decomposition.
    Splitting(RunArgs),
    /// Sample stationary-noise norm functionals and their growth exponents.
    #[command(name = "ou-stats")]
    OuStats(RunArgs),
    /// Check noise admissibility and the model growth certificate.
    Validate(RunArgs),
    /// Print the resolved configuration without running anything.
    Describe(DescribeArgs),
}

#[derive(Args)]
struct DescribeArgs {
    #[arg(long)]
    config: PathBuf,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                std::process::exit(0);
            }
            let err = CliError::config(e.to_string());
            eprintln!("{}", err.stderr_record());
            std::process::exit(err.class.code());
        }
    };
    match dispatch(cli) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("{}", e.stderr_record());
            std::process::exit(e.class.code());
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => run_experiment("simulate", a),
        Command::Pullback(a) => run_experiment("pullback", a),
        Command::Absorb(a) => run_experiment("absorb", a),
        Command::Splitting(a) => run_experiment("splitting", a),
        Command::OuStats(a) => run_experiment("ou-stats", a),
        Command::Validate(a) => run_experiment("validate", a),
        Command::Describe(a) => describe(&a.config),
    }
}

fn load(path: &PathBuf) -> CliResult<(Vec<u8>, RunConfig)> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::config(format!("cannot read config {}: {e}", path.display())))?;
    let cfg = RunConfig::from_json(&bytes)?;
    Ok((bytes, cfg))
}

fn run_experiment(command: &'static str, args: RunArgs) -> CliResult<()> {
    let (bytes, cfg) = load(&args.config)?;
    if cfg.experiment.kind() != command {
        return Err(CliError::config(format!(
            "config declares experiment '{}' but the subcommand is '{command}'",
            cfg.experiment.kind()
        )));
    }
    let resolved = cfg.resolve()?;
    let threads = args
        .threads
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    if threads == 0 {
        return Err(CliError::config("--threads must be at least 1"));
    }

    let out: RunOutput = match command {
        "simulate" => experiments::run_simulate(&cfg, &resolved)?,
        "pullback" => experiments::run_pullback(&cfg, &resolved)?,
        "absorb" => experiments::run_absorb(&cfg, &resolved)?,
        "splitting" => experiments::run_splitting(&cfg, &resolved)?,
        "ou-stats" => experiments::run_ou_stats(&cfg, &resolved, threads)?,
        "validate" => experiments::run_validate(&cfg, &resolved)?,
        _ => unreachable!("all subcommands handled"),
    };

    let dir = args
        .out
        .or_else(|| cfg.output.directory.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    output::write_outputs(&dir, command, &bytes, cfg.noise.seed, &out.files, out.summary)?;

    if !out.failures.is_empty() {
        return Err(CliError::validation(format!(
            "validator FAIL on: {}",
            out.failures.join(", ")
        )));
    }
    println!("{command}: wrote {} file(s) to {}", out.files.len() + 1, dir.display());
    Ok(())
}

fn describe(path: &PathBuf) -> CliResult<()> {
    let (_, cfg) = load(path)?;
    let r = cfg.resolve()?;
    let b = &r.basis;
    println!(
        "basis: dim={} modes={} grid={} per axis ({} modes, {} points), diffusion={}, padding={}",
        b.dim(),
        b.modes_per_axis(),
        b.grid_per_axis(),
        b.mode_count(),
        b.point_count(),
        b.diffusion(),
        b.padding(),
    );
    let g = r.path.grid();
    println!(
        "noise: h_noise={} window=[{}, {}] seed={} alpha={}",
        g.h(),
        g.t_min(),
        g.t_max(),
        g.seed(),
        cfg.noise.alpha,
    );
    let rep = partdiss_core::noise::validate(
        b,
        r.path.covariance(Channel::One),
        r.path.covariance(Channel::Two),
        cfg.noise.alpha,
        256,
    )?;
    for check in [&rep.channel2_trace, &rep.channel1_weighted] {
        println!("  {}: partial sum {:.6e} ({:?})", check.label, check.partial_sum, check.verdict);
    }
    let c = &r.model.constants;
    println!("model: {} (p={}, sigma in [{}, {}])", r.model.name, c.p, c.damping_min, c.damping_max);
    println!(
        "  growth constants: p1={} dissipation=[{}, {}] offset={} coupling={} feedback lip={} affine={} reaction={}",
        c.p1,
        c.dissipation_lower,
        c.dissipation_upper,
        c.dissipation_offset,
        c.coupling_bound,
        c.feedback_lipschitz,
        c.feedback_affine,
        c.reaction_affine,
    );
    println!(
        "solver: scheme={:?} h_step={} record_every={} snapshots={}",
        cfg.solver.scheme, cfg.solver.h_step, cfg.solver.record_every, cfg.output.snapshots,
    );
    println!("experiment: {}", cfg.experiment.kind());

    // rough per-trajectory footprint: state pair, stationary pair, padded scratch
    let nm = b.mode_count() as f64;
    let np = b.point_count() as f64;
    let pad = b.padding().powi(b.dim() as i32);
    let state_bytes = 8.0 * (2.0 * nm + 2.0 * np + 3.0 * np * pad);
    println!("memory estimate: ~{:.1} KiB per trajectory state", state_bytes / 1024.0);
    Ok(())
}
