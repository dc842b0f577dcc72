use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use homlab::{cmd_cell, cmd_micro, cmd_sweep, cmd_verify, AppError, ExperimentConfig, RunOptions};

#[derive(Parser)]
#[command(name = "homlab", version, about = "Two-scale corrector experiments in perforated domains")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the corrector hierarchy and write its archive.
    Cell(Common),
    /// Solve the microscale problem at `micro.eps`.
    Micro(Common),
    /// Corrector errors over the eps list and the fitted order.
    Sweep(Common),
    /// Manufactured-solution, effective-tensor and contraction checks.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for the sweep.
    #[arg(long)]
    jobs: Option<usize>,
    /// Overwrite an existing run directory.
    #[arg(long)]
    force: bool,
    /// Output directory; overrides `output_dir` of the config.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<i32, AppError> {
    let (Command::Cell(c) | Command::Micro(c) | Command::Sweep(c) | Command::Verify(c)) = &cli.command;
    let config = ExperimentConfig::load(&c.config)?;
    let options = RunOptions { jobs: c.jobs, force: c.force, output: c.output.clone() };
    match cli.command {
        Command::Cell(_) => {
            println!("{}", cmd_cell(&config, &options)?.summary());
            Ok(0)
        }
        Command::Micro(_) => {
            println!("{}", cmd_micro(&config, &options)?.summary());
            Ok(0)
        }
        Command::Sweep(_) => {
            let out = cmd_sweep(&config, &options)?;
            println!("{}", out.summary());
            if !out.passed {
                eprintln!("GATE: order gate failed: {}", homlab::report::describe(&out.report));
            }
            Ok(out.exit_code())
        }
        Command::Verify(_) => {
            let out = cmd_verify(&config, &options)?;
            println!("{}", out.summary());
            Ok(if out.passed() { 0 } else { 6 })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{}: {e}", e.class());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
