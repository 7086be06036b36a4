use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use foam::runner::{run_scenario, RunOptions, VERSION};
use foam::{generators, Scenario};

#[derive(Parser)]
#[command(name = "foam", version, about = "Verify generalized-function scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its report.
    Run {
        scenario: PathBuf,
        /// Output directory for the report and CSV files.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the named check generators.
    ListGenerators,
    /// Print the tool version.
    Version,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FOAM_LOG", "error")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, seed, jobs } => {
            let result = Scenario::load(&scenario).and_then(|s| {
                run_scenario(
                    &s,
                    &RunOptions {
                        out_dir: Some(out),
                        seed,
                        jobs,
                    },
                )
            });
            match result {
                Ok(r) => {
                    for c in &r.checks {
                        println!("{:<13} {}", c.status.as_str(), c.name);
                    }
                    ExitCode::from(r.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(e.exit_code() as u8)
                }
            }
        }
        Command::ListGenerators => {
            for g in generators() {
                println!("{:<14} {}", g.name, g.summary);
            }
            ExitCode::SUCCESS
        }
        Command::Version => {
            println!("foam {VERSION}");
            ExitCode::SUCCESS
        }
    }
}
