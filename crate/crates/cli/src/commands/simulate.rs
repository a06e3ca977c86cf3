//! `sketchreg simulate`: write a synthetic regression data set (and its
//! true coefficients) to disk, streaming row by row so the size is bounded
//! only by disk.

use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use crate::commands::parse_format;
use crate::data::{self, DataFormat};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::simulate::{SimConfig, Simulator};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of observations.
    #[arg(long)]
    pub n: u64,
    /// Number of variables (the output gains a response column).
    #[arg(long)]
    pub d: usize,
    /// Error standard deviation.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output container: csv or bin.
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: DataFormat,
    /// Output data file ([X, Y], response last).
    #[arg(long)]
    pub output: PathBuf,
    /// Optional file for the true coefficients, one per line.
    #[arg(long)]
    pub beta_out: Option<PathBuf>,
    /// Probability of a structurally zero coefficient.
    #[arg(long, default_value_t = 0.5)]
    pub zero_inflation: f64,
    /// Poisson mean of active coefficient magnitudes.
    #[arg(long, default_value_t = 3.0)]
    pub poisson_mean: f64,
    /// Standard deviation of column means.
    #[arg(long, default_value_t = 5.0)]
    pub col_mean_sd: f64,
    /// Variance of X entries around their column mean.
    #[arg(long, default_value_t = 4.0)]
    pub x_var: f64,
}

pub fn run(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = SimConfig::new(args.n, args.d, args.sigma, args.seed);
    cfg.zero_inflation = args.zero_inflation;
    cfg.poisson_mean = args.poisson_mean;
    cfg.col_mean_sd = args.col_mean_sd;
    cfg.x_var = args.x_var;

    let mut manifest = RunManifest::new("simulate");
    manifest.seed = Some(args.seed);
    let start = Instant::now();

    let mut sim = Simulator::new(&cfg)?;
    let d_total = args.d + 1;
    let mut buf = vec![0.0; d_total];

    let file = std::fs::File::create(&args.output).map_err(|e| CliError::io(&args.output, e))?;
    let mut w = BufWriter::new(file);
    match args.format {
        DataFormat::Csv => {
            while sim.next_row(&mut buf) {
                data::write_csv_row(&mut w, &buf).map_err(|e| CliError::io(&args.output, e))?;
            }
        }
        DataFormat::Binary => {
            w.write_all(&data::binary_header(args.n, d_total as u64))
                .map_err(|e| CliError::io(&args.output, e))?;
            while sim.next_row(&mut buf) {
                data::write_f64_row(&mut w, &buf).map_err(|e| CliError::io(&args.output, e))?;
            }
        }
        DataFormat::Updates => {
            return Err(CliError::contract("simulate writes csv or bin, not updates"));
        }
    }
    w.flush().map_err(|e| CliError::io(&args.output, e))?;
    manifest.add_output(&args.output);

    if let Some(beta_path) = &args.beta_out {
        let mut f =
            std::fs::File::create(beta_path).map_err(|e| CliError::io(beta_path, e))?;
        for b in sim.beta() {
            writeln!(f, "{b}").map_err(|e| CliError::io(beta_path, e))?;
        }
        manifest.add_output(beta_path);
    }
    manifest.record_ms("simulate", start);
    manifest.write_beside(&args.output)?;
    eprintln!("wrote {} rows x {} columns to {}", args.n, d_total, args.output.display());
    Ok(())
}
