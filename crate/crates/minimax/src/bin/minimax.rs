use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "minimax", about = "Descent solver for finite minimax problems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solver on the configured problem
    Solve {
        config: PathBuf,
        /// Override the trace output path from the config
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Override the result output path from the config
        #[arg(long)]
        result: Option<PathBuf>,
    },
    /// Validate analytic gradients against finite differences
    Check { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Solve { config, trace, result } => {
            minimax::cli::run(&config, trace.as_deref(), result.as_deref())
        }
        Command::Check { config } => minimax::cli::check(&config),
    };
    ExitCode::from(code as u8)
}
