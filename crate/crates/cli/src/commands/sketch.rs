//! `sketchreg sketch`: stream a data file into a sketch file.
//!
//! Rows are read in blocks of 8192, sketched by parallel builders sharing
//! the seed, and merged in block order, so the output is byte-deterministic
//! for a given seed and input regardless of the thread count.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;

use sketchreg_core::hashing::SketchSeed;
use sketchreg_core::linalg::DenseMatrix;
use sketchreg_core::sketch::{self, SketchBuilder, SketchMethod, UpdateTriple, DEFAULT_SRHT_BLOCK};

use crate::commands::{build_pool, parse_format, parse_method, thread_budget};
use crate::data::{for_each_update, DataFormat, RowStream};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::sketch_io::SketchFile;

/// Rows per parallel work unit; a power of two so SRHT transform blocks
/// stay aligned to global indices.
const BLOCK_ROWS: usize = 8192;

#[derive(Debug, Args)]
pub struct SketchArgs {
    /// Input data file; the response is the last column.
    #[arg(long)]
    pub input: PathBuf,
    /// Input container: csv, bin (SKDT), or updates (i,j,u lines).
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: crate::data::DataFormat,
    /// Sketching method: rad, srht, cw, or gram.
    #[arg(long, value_parser = parse_method)]
    pub method: SketchMethod,
    /// Distortion target; resolves k via the sizing formulas.
    #[arg(long, conflicts_with = "k")]
    pub epsilon: Option<f64>,
    /// Explicit sketch size, bypassing the sizing formulas.
    #[arg(long)]
    pub k: Option<usize>,
    /// Embedding failure probability (recorded; enters only the strict
    /// sizing policy).
    #[arg(long, default_value_t = 0.1)]
    pub alpha: f64,
    /// Master seed for the sketching matrix.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Upper bound on the number of rows (required for srht unless the
    /// input carries a row count).
    #[arg(long)]
    pub n_hint: Option<u64>,
    /// Global index of this file's first row, for sketching one partition
    /// of a distributed stream. Sketches of disjoint partitions built with
    /// the same seed merge into the whole-stream sketch.
    #[arg(long, default_value_t = 0)]
    pub row_offset: u64,
    /// Prepend a constant 1 column before sketching.
    #[arg(long, default_value_t = false)]
    pub add_intercept: bool,
    /// Skip the first CSV line.
    #[arg(long, default_value_t = false)]
    pub has_header: bool,
    /// Total column count for update streams (data columns + response).
    #[arg(long)]
    pub d_total: Option<usize>,
    /// SRHT transform block size (power of two; 0 disables blocking).
    #[arg(long, default_value_t = DEFAULT_SRHT_BLOCK)]
    pub srht_block: usize,
    /// Output sketch file.
    #[arg(long)]
    pub output: PathBuf,
    /// Optional CSV mirror of the sketch payload.
    #[arg(long)]
    pub csv_mirror: Option<PathBuf>,
}

pub fn run(args: &SketchArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("sketch");
    manifest.seed = Some(args.seed);
    manifest.add_input(&args.input)?;
    let seed = SketchSeed::from_master(args.seed);

    let start = Instant::now();
    let (builder, read_ms, sketch_ms) = match args.format {
        DataFormat::Updates => sketch_update_stream(args, seed)?,
        _ => sketch_row_stream(args, seed)?,
    };
    let mut builder = builder;
    let payload = builder.finalize();
    let file = SketchFile {
        method: args.method,
        seed_master: args.seed,
        m: builder.hadamard_dim(),
        rows_seen: builder.rows_seen(),
        payload,
    };
    file.write(&args.output)?;
    manifest.add_output(&args.output);
    if let Some(mirror) = &args.csv_mirror {
        file.write_csv_mirror(mirror)?;
        manifest.add_output(mirror);
    }
    manifest.timings_ms.insert("read".into(), read_ms);
    manifest.timings_ms.insert("sketch".into(), sketch_ms);
    manifest.record_ms("total", start);
    let mpath = manifest.write_beside(&args.output)?;
    eprintln!(
        "sketched {} rows into {} x {} ({}); wrote {} and {}",
        file.rows_seen,
        file.k(),
        file.d_total(),
        args.method,
        args.output.display(),
        mpath.display()
    );
    Ok(())
}

/// Resolves the sketch size from the flags and data shape.
fn resolve_k(args: &SketchArgs, data_d_total: usize) -> Result<usize, CliError> {
    if args.method == SketchMethod::Gram {
        if args.epsilon.is_some() || args.k.is_some() {
            eprintln!("warning: gram ignores --epsilon/--k; output is d_total x d_total");
        }
        return Ok(data_d_total);
    }
    if let Some(k) = args.k {
        return Ok(k);
    }
    let epsilon = args
        .epsilon
        .ok_or_else(|| CliError::contract("one of --epsilon or --k is required"))?;
    match args.method {
        SketchMethod::Cw => {
            // Variable count: columns minus the response and any intercept.
            let d_var = data_d_total
                .saturating_sub(1)
                .saturating_sub(usize::from(args.add_intercept));
            if d_var == 0 {
                return Err(CliError::contract("no variable columns for the bucket sketch"));
            }
            Ok(sketch::target_dimension(args.method, d_var, epsilon, args.alpha)?)
        }
        _ => Ok(sketch::target_dimension(args.method, data_d_total, epsilon, args.alpha)?),
    }
}

fn sketch_row_stream(
    args: &SketchArgs,
    seed: SketchSeed,
) -> Result<(SketchBuilder, f64, f64), CliError> {
    let stream = RowStream::open(&args.input, args.format, args.has_header)?;
    let file_d = stream.d_total();
    let d_total = file_d + usize::from(args.add_intercept);
    let n_hint = args.n_hint.or_else(|| stream.n_known().map(|n| n + args.row_offset));
    if args.method == SketchMethod::Srht && n_hint.is_none() {
        return Err(CliError::contract(
            "srht needs --n-hint (csv inputs carry no row count)",
        ));
    }
    let k = resolve_k(args, d_total)?;

    let mut template = SketchBuilder::new(args.method, d_total, k, n_hint, seed)?;
    if args.method == SketchMethod::Srht && args.srht_block > 0 {
        template.set_srht_block_size(args.srht_block.min(BLOCK_ROWS))?;
    }

    let threads = thread_budget();
    let pool = build_pool(threads)?;
    let wave_capacity = threads * 2;

    let total_start = Instant::now();
    let mut sketch_ms = 0.0f64;
    let mut main: Option<SketchBuilder> = Some(template.clone());
    let mut wave: Vec<(u64, DenseMatrix)> = Vec::with_capacity(wave_capacity);
    let mut block: Vec<f64> = Vec::with_capacity(BLOCK_ROWS * d_total);
    let mut block_base = 0u64;

    let flush_wave = |wave: &mut Vec<(u64, DenseMatrix)>,
                          main: &mut Option<SketchBuilder>,
                          sketch_ms: &mut f64|
     -> Result<(), CliError> {
        if wave.is_empty() {
            return Ok(());
        }
        let t = Instant::now();
        let results: Vec<Result<SketchBuilder, sketchreg_core::sketch::SketchError>> =
            pool.install(|| {
                wave.par_iter()
                    .map(|(base, data)| {
                        let mut b = template.clone();
                        b.push_matrix(*base, data)?;
                        Ok(b)
                    })
                    .collect()
            });
        wave.clear();
        for r in results {
            let done = r?;
            let acc = main.take().expect("main builder present");
            *main = Some(acc.merge(done)?);
        }
        *sketch_ms += t.elapsed().as_secs_f64() * 1e3;
        Ok(())
    };

    let offset = args.row_offset;
    let rows = stream.for_each_row(|i, row| {
        if block.is_empty() {
            block_base = offset + i;
        }
        if args.add_intercept {
            block.push(1.0);
        }
        block.extend_from_slice(row);
        if block.len() == BLOCK_ROWS * d_total {
            let data = DenseMatrix::from_vec(BLOCK_ROWS, d_total, std::mem::take(&mut block))
                .expect("block is rectangular");
            block.reserve(BLOCK_ROWS * d_total);
            wave.push((block_base, data));
            if wave.len() >= wave_capacity {
                flush_wave(&mut wave, &mut main, &mut sketch_ms)?;
            }
        }
        Ok(())
    })?;
    if !block.is_empty() {
        let rows_left = block.len() / d_total;
        let data = DenseMatrix::from_vec(rows_left, d_total, std::mem::take(&mut block))
            .expect("block is rectangular");
        wave.push((block_base, data));
    }
    flush_wave(&mut wave, &mut main, &mut sketch_ms)?;

    let total_ms = total_start.elapsed().as_secs_f64() * 1e3;
    let builder = main.expect("main builder present");
    debug_assert_eq!(builder.rows_seen(), rows);
    Ok((builder, (total_ms - sketch_ms).max(0.0), sketch_ms))
}

fn sketch_update_stream(
    args: &SketchArgs,
    seed: SketchSeed,
) -> Result<(SketchBuilder, f64, f64), CliError> {
    if args.add_intercept {
        return Err(CliError::contract(
            "--add-intercept is undefined for update streams; include the column in the updates",
        ));
    }
    let d_total = args
        .d_total
        .ok_or_else(|| CliError::contract("update streams need --d-total"))?;
    if args.method == SketchMethod::Srht && args.n_hint.is_none() {
        return Err(CliError::contract("srht needs --n-hint for update streams"));
    }
    let k = resolve_k(args, d_total)?;
    let mut builder = SketchBuilder::new(args.method, d_total, k, args.n_hint, seed)?;
    let start = Instant::now();
    for_each_update(&args.input, |t: UpdateTriple| {
        builder.push_update(t).map_err(CliError::from)
    })?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    Ok((builder, 0.0, ms))
}
