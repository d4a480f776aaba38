use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use sphmean::{load_config, run_command, Command, IoPaths};

/// Forward operators, range certification and time-reversal reconstruction
/// for spherical means on H2 and S2.
#[derive(Parser)]
#[command(name = "sphmean", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Input sinogram for certify and reconstruct.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Directory for artifacts.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Pass threshold for certify and roundtrip, residual bound for verify-identities.
    #[arg(long)]
    tolerance: Option<f64>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            return ExitCode::from(code);
        }
    };
    let paths = IoPaths { input: cli.input, out: cli.out, tolerance: cli.tolerance, quiet: cli.quiet };
    let result = load_config(&cli.config).and_then(|config| run_command(cli.command, &config, &paths));
    match result {
        Ok(outcome) => {
            if !paths.quiet {
                println!("{}", outcome.summary);
                for a in &outcome.artifacts {
                    println!("  wrote {}", a.display());
                }
            }
            ExitCode::from(outcome.exit_code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
