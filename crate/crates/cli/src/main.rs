use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod characterize;
mod config;
mod failure;
mod fit;
mod manifest;
mod output;
mod radar;
mod svg;
mod validate;

use failure::Failure;

#[derive(Parser)]
#[command(
    name = "multibox",
    version,
    about = "Multi-tone mixer modeling and comb OFDM radar simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a device and write a reference dataset with AM-AM plots.
    Characterize {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Input power grid as start:step:stop in dBm, inclusive.
        #[arg(long, allow_hyphen_values = true)]
        power_grid: Option<String>,
    },
    /// Fit a multibox model to a reference dataset.
    Fit {
        #[arg(long)]
        config: PathBuf,
        /// reference.csv from characterize.
        #[arg(long)]
        reference: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the multi-start seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the number of random starts.
        #[arg(long)]
        starts: Option<usize>,
    },
    /// Run a comb radar scenario and write the range-Doppler map.
    Radar {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Run two transmit mixers (ideal, surrogate or a model document)
        /// and report metric deltas of the second against the first.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        compare: Option<Vec<String>>,
        /// Seeds both the QPSK grid and the receiver noise.
        #[arg(long)]
        seed: Option<u64>,
        /// Keep only the first N targets of the scenario.
        #[arg(long)]
        targets: Option<usize>,
    },
    /// Check a model document against the model invariants.
    Validate {
        /// model.json to check.
        model: PathBuf,
        /// Also write manifest.json and validation.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Characterize {
            config,
            out,
            power_grid,
        } => characterize::run(&config, &out, power_grid.as_deref()),
        Command::Fit {
            config,
            reference,
            out,
            seed,
            starts,
        } => fit::run(&config, &reference, &out, seed, starts),
        Command::Radar {
            config,
            out,
            compare,
            seed,
            targets,
        } => radar::run(&config, &out, compare.as_deref(), seed, targets),
        Command::Validate { model, out } => validate::run(&model, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
