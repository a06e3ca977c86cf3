//! I/O, file formats, synthetic data, and the command-line front end for
//! the `sketchreg-core` embedding and posterior machinery.
//!
//! File formats owned by this crate:
//! - numeric CSV (response in the last column by convention),
//! - `SKDT` binary data matrices,
//! - `i,j,u` turnstile update text files,
//! - `SKRG` sketch files (self-describing: method, seed, dimensions,
//!   payload),
//! - posterior mean/sd and covariance CSVs,
//! - JSON run manifests with input digests and timings.

pub mod data;
pub mod error;
pub mod manifest;
pub mod simulate;
pub mod sketch_io;

pub mod commands;

pub use error::{exit_code, CliError};
