//! Streaming data reduction for regression: oblivious subspace embeddings
//! that compress an `n x (d+1)` data set `[X, Y]` with `n >> d` into a small
//! sketch `[PX, PY]`, plus exact conjugate Gaussian posteriors computed on
//! the sketch and a verification layer that measures every approximation
//! guarantee the embeddings provide.
//!
//! The crate is `no_std` (with `alloc`); all I/O, file formats and the CLI
//! live in the companion `sketchreg` crate.
//!
//! Modules:
//! - [`hashing`]: limited-independence hash families whose few-word seeds
//!   implicitly define every entry of the sketching matrices.
//! - [`sketch`]: the three embeddings (dense sign matrix, subsampled
//!   randomized Hadamard transform, input-sparsity bucket sketch) and the
//!   Gram baseline, as single-pass mergeable turnstile builders.
//! - [`linalg`]: dense kernels -- SVD, least squares, spectral norm,
//!   inverse-Gram traces, condition numbers, fast Walsh-Hadamard transform.
//! - [`bayes`]: conjugate Gaussian posteriors on original or sketched data,
//!   with Gaussian priors folded in as unsketched pseudo-observations.
//! - [`metrics`]: embedding certification, Gaussian Wasserstein distances,
//!   and evaluators for the approximation bounds.

#![no_std]

extern crate alloc;

pub mod bayes;
pub mod hashing;
pub mod linalg;
pub mod metrics;
pub mod sketch;

pub use bayes::{AugmentedSystem, GaussianMeasure, PriorSpec, SigmaSpec};
pub use hashing::SketchSeed;
pub use linalg::{DenseMatrix, SvdFactors};
pub use metrics::{BoundReport, EmbeddingReport};
pub use sketch::{SketchBuilder, SketchMethod, UpdateTriple};
