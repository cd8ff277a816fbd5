use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use cutset_cli::{parse_problem, run_command, Command, Options, EXIT_INVALID};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    /// Print the cut region of the network over Ψ as JSON.
    Region,
    /// Test whether the sources can be conveyed within the distortion targets.
    Check,
    /// Classical cut-set test of the rate matrix in [rates].
    CutsetRates,
    /// Repair a near-feasible reconstruction so every target is met.
    Perturb,
    /// Randomized check of the region-composition properties.
    Props,
}

/// Cut-set regions of discrete memoryless networks.
#[derive(Debug, Parser)]
#[command(name = "cutset-region", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Problem file (optional for `props`).
    spec: Option<PathBuf>,
    /// Override the grid resolution of Ψ.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Search deterministic reconstructions only.
    #[arg(long)]
    deterministic_recs: bool,
    /// Number of random cases for `props`.
    #[arg(long)]
    cases: Option<usize>,
}

fn run(args: Args) -> Result<i32, String> {
    let spec = match &args.spec {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Some(parse_problem(&text).map_err(|e| format!("{}: {e}", path.display()))?)
        }
        None => None,
    };
    let command = match args.command {
        Cmd::Region => Command::Region,
        Cmd::Check => Command::Check,
        Cmd::CutsetRates => Command::CutsetRates,
        Cmd::Perturb => Command::Perturb,
        Cmd::Props => Command::Props,
    };
    let opts = Options {
        grid: args.grid,
        seed: args.seed,
        deterministic_recs: args.deterministic_recs,
        cases: args.cases,
    };
    let outcome = run_command(command, spec.as_ref(), &opts).map_err(|e| e.to_string())?;
    match &args.out {
        Some(path) => {
            std::fs::write(path, format!("{}\n", outcome.report)).map_err(|e| format!("{}: {e}", path.display()))?
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = writeln!(stdout, "{}", outcome.report) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(format!("stdout: {e}"));
                }
            }
        }
    }
    Ok(outcome.code)
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_INVALID as u8)
        }
    }
}
