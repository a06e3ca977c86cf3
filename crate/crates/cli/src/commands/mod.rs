//! CLI subcommands. Each module owns its clap argument struct and a
//! `run` entry point returning [`crate::CliError`] on failure.

pub mod bench;
pub mod merge;
pub mod posterior;
pub mod simulate;
pub mod sketch;
pub mod verify;

use sketchreg_core::sketch::SketchMethod;

use crate::data::DataFormat;
use crate::error::CliError;

pub fn parse_method(s: &str) -> Result<SketchMethod, String> {
    match s {
        "rad" => Ok(SketchMethod::Rad),
        "srht" => Ok(SketchMethod::Srht),
        "cw" => Ok(SketchMethod::Cw),
        "gram" => Ok(SketchMethod::Gram),
        other => Err(format!("unknown method {other:?} (expected rad|srht|cw|gram)")),
    }
}

pub fn parse_format(s: &str) -> Result<DataFormat, String> {
    DataFormat::parse(s).ok_or_else(|| format!("unknown format {s:?} (expected csv|bin|updates)"))
}

/// Thread budget: `SKETCHREG_THREADS` caps parallelism, defaulting to the
/// machine's available parallelism.
pub fn thread_budget() -> usize {
    let available = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    match std::env::var("SKETCHREG_THREADS") {
        Ok(v) => v.parse::<usize>().ok().filter(|&n| n >= 1).unwrap_or(available).min(available),
        Err(_) => available,
    }
}

pub fn build_pool(threads: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::contract(format!("thread pool: {e}")))
}
