use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use carenet::cli::{cmd_dof, cmd_simulate, cmd_validate, RunMode};
use carenet::scenario::load_scenario;

#[derive(Parser)]
#[command(
    name = "carenet",
    version,
    about = "Simulate care delivery and patient health on coupled Petri nets"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Replay,
    Sample,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file and print one line per check.
    Validate { file: PathBuf },
    /// List the structural degrees of freedom.
    Dof { file: PathBuf },
    /// Run the co-simulation and write CSV outputs.
    Simulate {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "replay")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Independent seeded runs merged into the summary.
        #[arg(long, default_value_t = 1)]
        runs: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate { file } => {
            let (text, ok) = cmd_validate(&file);
            print!("{text}");
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Dof { file } => match load_scenario(&file) {
            Ok(s) => {
                print!("{}", cmd_dof(&s));
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::FAILURE
            }
        },
        Command::Simulate {
            file,
            mode,
            seed,
            out,
            runs,
        } => {
            let mode = match mode {
                ModeArg::Replay => RunMode::Replay,
                ModeArg::Sample => RunMode::Sample,
            };
            let result = load_scenario(&file)
                .map_err(Into::into)
                .and_then(|s| cmd_simulate(&s, mode, seed, &out, runs));
            match result {
                Ok(report) => {
                    print!("{}", report.summary);
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
    }
}
