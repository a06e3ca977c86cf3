//! `sketchreg bench`: per-method sketching throughput over a ladder of row
//! counts. "read" times one pass over the in-memory rows; "sketch" times
//! the builder push loop. Emits one CSV row per (size, method, rep).

use std::hint::black_box;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use sketchreg_core::hashing::SketchSeed;
use sketchreg_core::sketch::{self, SketchBuilder, SketchMethod, DEFAULT_SRHT_BLOCK};

use crate::commands::parse_method;
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::simulate::{simulate_combined, SimConfig};

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Comma-separated methods to time. The dense sign sketch is O(n d k)
    /// and slow at these sizes; opt in explicitly.
    #[arg(long, default_value = "cw", value_delimiter = ',', value_parser = parse_method)]
    pub methods: Vec<SketchMethod>,
    /// Comma-separated row counts.
    #[arg(long, default_value = "100000,200000,400000", value_delimiter = ',')]
    pub sizes: Vec<u64>,
    #[arg(long, default_value_t = 50)]
    pub d: usize,
    #[arg(long, default_value_t = 0.2)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Timed repetitions per (size, method).
    #[arg(long, default_value_t = 5)]
    pub reps: usize,
    /// Output CSV of timings.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: &BenchArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("bench");
    manifest.seed = Some(args.seed);
    let start = Instant::now();

    let file = std::fs::File::create(&args.output).map_err(|e| CliError::io(&args.output, e))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "n,d,method,k,rep,read_ms,sketch_ms").map_err(|e| CliError::io(&args.output, e))?;

    for &n in &args.sizes {
        let cfg = SimConfig::new(n, args.d, 5.0, args.seed ^ n);
        let (data, _beta) = simulate_combined(&cfg)?;
        let d_total = data.cols();
        for &method in &args.methods {
            let k = match method {
                SketchMethod::Cw => {
                    sketch::target_dimension(method, args.d, args.epsilon, args.alpha)?
                }
                SketchMethod::Gram => d_total,
                _ => sketch::target_dimension(method, d_total, args.epsilon, args.alpha)?,
            };
            for rep in 0..args.reps {
                // Read pass: touch every row, no sketching.
                let t_read = Instant::now();
                let mut checksum = 0.0f64;
                for i in 0..data.rows() {
                    checksum += data.row(i)[0];
                }
                black_box(checksum);
                let read_ms = t_read.elapsed().as_secs_f64() * 1e3;

                let seed = SketchSeed::from_master(args.seed ^ (rep as u64));
                let mut builder = SketchBuilder::new(method, d_total, k, Some(n), seed)?;
                if method == SketchMethod::Srht {
                    builder.set_srht_block_size(DEFAULT_SRHT_BLOCK)?;
                }
                let t_sketch = Instant::now();
                builder.push_matrix(0, &data)?;
                black_box(builder.rows_seen());
                let sketch_ms = t_sketch.elapsed().as_secs_f64() * 1e3;

                writeln!(out, "{n},{},{method},{k},{rep},{read_ms},{sketch_ms}", args.d)
                    .map_err(|e| CliError::io(&args.output, e))?;
            }
        }
    }
    out.flush().map_err(|e| CliError::io(&args.output, e))?;
    manifest.add_output(&args.output);
    manifest.record_ms("bench", start);
    manifest.write_beside(&args.output)?;
    eprintln!("timings written to {}", args.output.display());
    Ok(())
}
