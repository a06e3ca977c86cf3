use clap::{Parser, Subcommand};

use sketchreg::commands;
use sketchreg::exit_code;

/// Streaming data reduction for regression: sketch huge `[X, Y]` data sets
/// into small matrices with oblivious subspace embeddings, compute exact
/// conjugate Gaussian posteriors on the sketch, and verify the
/// approximation guarantees.
#[derive(Parser)]
#[command(name = "sketchreg", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stream a data file into a sketch file.
    Sketch(commands::sketch::SketchArgs),
    /// Sum sketches of disjoint stream parts (shared seed).
    Merge(commands::merge::MergeArgs),
    /// Exact conjugate posterior from a sketch file.
    Posterior(commands::posterior::PosteriorArgs),
    /// Measure embedding quality and every approximation bound.
    Verify(commands::verify::VerifyArgs),
    /// Generate synthetic regression data.
    Simulate(commands::simulate::SimulateArgs),
    /// Time sketch construction over a size ladder.
    Bench(commands::bench::BenchArgs),
}

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sketch(args) => commands::sketch::run(args),
        Command::Merge(args) => commands::merge::run(args),
        Command::Posterior(args) => commands::posterior::run(args),
        Command::Verify(args) => commands::verify::run(args),
        Command::Simulate(args) => commands::simulate::run(args),
        Command::Bench(args) => commands::bench::run(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(exit_code(&err));
    }
}
