mod commands;
mod config;

use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Point-vortex statistical mechanics on the unit torus: seeded samplers,
/// Hamiltonian dynamics, spectra, and scripted experiments.
#[derive(Parser)]
#[command(name = "vortexgas", version, about)]
struct Cli {
    /// Worker threads for the data-parallel kernels (default: all cores).
    /// Outputs are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Optional key=value config file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a vortex configuration or a truncated white-noise field,
    /// optionally conditioned on an energy window.
    Sample(commands::SampleArgs),
    /// Integrate the point-vortex dynamics from a configuration CSV.
    Evolve(commands::EvolveArgs),
    /// Shell-binned energy spectrum of a field or configuration CSV.
    Spectrum(commands::SpectrumArgs),
    /// Histogram a column of a CSV file.
    Hist(commands::HistArgs),
    /// Run the exact-identity verification suite.
    Verify(commands::VerifyArgs),
    /// Run a scripted experiment by id.
    Experiment(commands::ExperimentArgs),
}

/// Exit codes: 0 ok, 2 usage, 3 acceptance failure, 4 near-collision,
/// 5 verification failure, 1 everything else.
fn exit_code_for(err: &vortexgas::Error) -> u8 {
    use vortexgas::Error::*;
    match err {
        AcceptanceFailure { .. } => 3,
        NearCollision { .. } => 4,
        InvalidRange(_) | InvalidCount(_) | InvalidComposition(_) | InvalidBins(_)
        | InvalidInput(_) | Parse(_) | ZeroWaveIndex => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    #[cfg(feature = "parallel")]
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
        {
            eprintln!("vortexgas: cannot configure {t} threads: {e}");
            return ExitCode::from(2);
        }
    }
    #[cfg(not(feature = "parallel"))]
    if cli.threads.is_some() {
        eprintln!("vortexgas: built without the `parallel` feature; --threads ignored");
    }

    let overrides = match cli.config.as_deref().map(config::load) {
        Some(Ok(cfg)) => Some(cfg),
        Some(Err(e)) => {
            eprintln!("vortexgas: config: {e}");
            return ExitCode::from(2);
        }
        None => None,
    };

    let result = match cli.command {
        Command::Sample(args) => commands::sample(args, overrides.as_ref()),
        Command::Evolve(args) => commands::evolve(args, overrides.as_ref()),
        Command::Spectrum(args) => commands::spectrum(args, overrides.as_ref()),
        Command::Hist(args) => commands::hist(args, overrides.as_ref()),
        Command::Verify(args) => commands::verify(args),
        Command::Experiment(args) => commands::experiment(args, overrides.as_ref()),
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("vortexgas: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}
