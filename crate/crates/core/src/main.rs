use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pcopt::bench::{bounds_command, run_experiment, ExperimentConfig};
use pcopt::Error;

#[derive(Parser)]
#[command(
    name = "pcopt",
    version,
    about = "Comparison-oracle optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the problem and oracle seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        output: Option<String>,
    },
    /// Print the deterministic convergence constants.
    Bounds {
        #[arg(long)]
        sigma: f64,
        #[arg(long = "L")]
        lipschitz: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        gap: f64,
    },
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) => 2,
        _ => 1,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run {
            config,
            seed,
            output,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = seed {
                cfg.override_seed(seed);
            }
            if let Some(output) = output {
                cfg.output_path = output;
            }
            let out = run_experiment(&cfg)?;
            println!("raw={}", out.raw_path.display());
            println!("summary={}", out.summary_path.display());
            Ok(())
        }
        Command::Bounds {
            sigma,
            lipschitz,
            n,
            m,
            eta,
            gap,
        } => {
            print!("{}", bounds_command(sigma, lipschitz, n, m, eta, gap)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
