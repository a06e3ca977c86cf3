//! `sketchreg merge`: sum sketch files built over disjoint parts of one
//! stream with a shared seed. Sketch linearity makes the sum equal the
//! single-pass sketch of the combined stream.

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;

use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::sketch_io::SketchFile;

#[derive(Debug, Args)]
pub struct MergeArgs {
    /// Sketch files to combine (at least one).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    /// Output sketch file.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: &MergeArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("merge");
    let start = Instant::now();
    let mut merged: Option<SketchFile> = None;
    for path in &args.inputs {
        manifest.add_input(path)?;
        let part = SketchFile::read(path)?;
        merged = Some(match merged {
            None => part,
            Some(mut acc) => {
                check_same(&acc, &part, path)?;
                for (a, b) in acc.payload.data_mut().iter_mut().zip(part.payload.data()) {
                    *a += *b;
                }
                acc.rows_seen += part.rows_seen;
                acc
            }
        });
    }
    let merged = merged.expect("clap enforces at least one input");
    merged.write(&args.output)?;
    manifest.add_output(&args.output);
    manifest.record_ms("merge", start);
    manifest.write_beside(&args.output)?;
    eprintln!(
        "merged {} sketches ({} rows total) into {}",
        args.inputs.len(),
        merged.rows_seen,
        args.output.display()
    );
    Ok(())
}

fn check_same(a: &SketchFile, b: &SketchFile, path: &PathBuf) -> Result<(), CliError> {
    let fail = |field: &str| {
        Err(CliError::contract(format!(
            "{} differs in {field}; sketches are only mergeable with identical configuration",
            path.display()
        )))
    };
    if a.method != b.method {
        return fail("method");
    }
    if a.seed_master != b.seed_master {
        return fail("seed");
    }
    if a.k() != b.k() {
        return fail("k");
    }
    if a.d_total() != b.d_total() {
        return fail("d_total");
    }
    if a.m != b.m {
        return fail("m");
    }
    Ok(())
}
