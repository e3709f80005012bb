use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use heatkern_cli::{run_command, Task};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    /// Asymptotic partial sums on the t-grid.
    Asymptotics,
    /// Exact spectral traces on the t-grid.
    Oracle,
    /// Asymptotics against the oracle with tolerance checks.
    Compare,
    /// Comparison plus coefficients fitted to the oracle.
    Report,
}

/// Heat-trace asymptotics against exact spectra.
#[derive(Debug, Parser)]
#[command(name = "heatkern", version)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// INI run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output path, overriding `[output] path`.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let task = match args.command {
        Command::Asymptotics => Task::Asymptotics,
        Command::Oracle => Task::Oracle,
        Command::Compare => Task::Compare,
        Command::Report => Task::Report,
    };
    ExitCode::from(run_command(task, &args.config, args.out.as_deref()) as u8)
}
