//! Command line driver for seeded potential-theory experiments.

use clap::{Parser, Subcommand};
use potlab::experiment::{self, ExperimentConfig, ExperimentKind, RunOutput};
use potlab::Error;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "potlab",
    version,
    about = "Polarization, minimum energy, and equilibrium measures on compact sets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, clap::Args)]
struct CommonArgs {
    /// Experiment config (JSON, one experiment per file)
    #[arg(long)]
    config: PathBuf,
    /// Output directory for CSV tables and manifest.json
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Override the polarization mesh resolution
    #[arg(long)]
    mesh_resolution: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Maximin polarization probe (kinds: polarization-limit, random-points)
    Polarize(CommonArgs),
    /// Minimum-energy asymptotics probe (kind: energy-asymptote)
    Energy(CommonArgs),
    /// Greedy energy sequence (kind: greedy)
    Greedy(CommonArgs),
    /// Equilibrium measure, W_K, and assumption report (any kind)
    Equilibrium(CommonArgs),
    /// Verify the three equivalent convergence statements (kind: theorem-abc)
    Verify(CommonArgs),
    /// Solid-ball counterexample (kind: counterexample-ball)
    Counterexample(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (args, accepted): (&CommonArgs, &[ExperimentKind]) = match &cli.command {
        Command::Polarize(a) => (a, &[ExperimentKind::PolarizationLimit, ExperimentKind::RandomPoints]),
        Command::Energy(a) => (a, &[ExperimentKind::EnergyAsymptote]),
        Command::Greedy(a) => (a, &[ExperimentKind::Greedy]),
        Command::Equilibrium(a) => (a, &[]),
        Command::Verify(a) => (a, &[ExperimentKind::TheoremAbc]),
        Command::Counterexample(a) => (a, &[ExperimentKind::CounterexampleBall]),
    };

    match execute(&cli.command, args, accepted) {
        Ok(out) => {
            match out.verdict {
                Some(true) => {
                    eprintln!("verdict: PASS");
                    ExitCode::SUCCESS
                }
                Some(false) => {
                    eprintln!("verdict: FAIL");
                    ExitCode::from(2)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(Error::AssumptionsViolated(msg)) => {
            eprintln!("refused: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(
    command: &Command,
    args: &CommonArgs,
    accepted: &[ExperimentKind],
) -> potlab::Result<RunOutput> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let mut config = ExperimentConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(res) = args.mesh_resolution {
        config.mesh_resolution = Some(res);
    }
    if !accepted.is_empty() && !accepted.contains(&config.experiment) {
        return Err(Error::Config(format!(
            "this subcommand does not run {:?} experiments",
            config.experiment
        )));
    }

    let out = match command {
        Command::Equilibrium(_) => experiment::run_equilibrium_export(&config)?,
        _ => experiment::run(&config)?,
    };
    let written = experiment::emit(&out, &args.out)?;
    for path in &written {
        eprintln!("wrote {}", path.display());
    }
    Ok(out)
}
