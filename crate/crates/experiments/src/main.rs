use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use xsampler::{run, write_outputs, Config, Experiment, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Table2,
    Noise,
    Quant,
    Demo,
}

/// Sub-Nyquist sampling experiments for multipulse signals.
#[derive(Debug, Parser)]
#[command(name = "xsampler", version)]
struct Cli {
    /// Experiment to run.
    #[arg(value_enum)]
    command: Command,
    /// TOML configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
    /// Base seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let mut cfg = Config::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.seeds = None;
    }
    let experiment = match cli.command {
        Command::Table2 => Experiment::Table2,
        Command::Noise => Experiment::Noise,
        Command::Quant => Experiment::Quant,
        Command::Demo => Experiment::Demo,
    };
    let report = run(experiment, &cfg)?;
    print!("{}", report.summary());
    for path in write_outputs(&report, &cli.out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
