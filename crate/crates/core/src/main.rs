use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use relu_langevin::harness::{configure_threads, exit_code, run_experiment, ExperimentConfig, Mode, RunStatus};
use relu_langevin::Error;

const EXIT_CHECK_FAILURE: u8 = 3;

/// Langevin inversion of random ReLU generators and empirical checks of
/// its landscape and mixing behaviour.
#[derive(Debug, Parser)]
#[command(name = "relu-langevin", version)]
struct Cli {
    /// One of: landscape, wdc, rric, mix, invert, posterior, theory-check.
    mode: String,
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configuration seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: &Cli) -> Result<RunStatus, Error> {
    let mode = Mode::parse(&cli.mode)?;
    configure_threads()?;
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    match cfg.mode {
        Some(m) if m != mode => {
            return Err(Error::Config(format!(
                "command line mode {mode} differs from config mode {m}"
            )))
        }
        _ => cfg.mode = Some(mode),
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &cli.out {
        cfg.output.dir = out.clone();
    }
    let outcome = run_experiment(&cfg)?;
    for f in &outcome.files {
        println!("wrote {}", f.display());
    }
    Ok(outcome.status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(RunStatus::Ok) => ExitCode::SUCCESS,
        Ok(RunStatus::CheckFailed(ids)) => {
            eprintln!("failed checks: {}", ids.join(", "));
            ExitCode::from(EXIT_CHECK_FAILURE)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
