//! Command-line front end for the manifold-matching autoencoder engine:
//! dataset generation, training, evaluation, classical MDS, and a random
//! hyperparameter sweep. Every command takes a `--out` directory, writes
//! its artifacts there as CSV/JSON, and drops a manifest recording what
//! produced them. Given the same seeds, reruns reproduce every numeric
//! artifact byte for byte.

mod config;
mod eval;
mod generate;
mod manifest;
mod mds;
mod sweep;
mod train;

pub use config::{RunConfig, SweepSpec};
pub use manifest::RunManifest;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use mmae::Error;
use std::ffi::OsString;

#[derive(Parser, Debug)]
#[command(
    name = "mmae",
    version,
    about = "Manifold-matching autoencoders: generate data, train, evaluate, embed"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic benchmark point cloud.
    Generate {
        #[command(subcommand)]
        dataset: generate::Dataset,
    },
    /// Train an autoencoder described by a JSON run configuration.
    Train(train::TrainArgs),
    /// Score a trained checkpoint on a point cloud.
    Eval(eval::EvalArgs),
    /// Embed a point cloud with classical multidimensional scaling.
    Mds(mds::MdsArgs),
    /// Random-search training hyperparameters against a held-out objective.
    Sweep(sweep::SweepArgs),
}

/// Exit status for a failed command: inconsistent requests are usage
/// errors, unreadable or unparseable files are data errors, and anything
/// that left the realm of finite floats is a numerical failure.
fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Input(_) => 2,
        Error::Parse(_) | Error::Io(_) => 3,
        Error::Numerical(_) => 4,
    }
}

/// Runs the CLI against an explicit argument list (first element is the
/// program name) and returns the process exit code instead of exiting,
/// so tests can drive the binary in-process.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate { dataset } => generate::run(dataset),
        Command::Train(args) => train::run(args),
        Command::Eval(args) => eval::run(args),
        Command::Mds(args) => mds::run(args),
        Command::Sweep(args) => sweep::run(args),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
