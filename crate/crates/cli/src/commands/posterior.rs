//! `sketchreg posterior`: exact conjugate Gaussian posterior from a sketch
//! file, with a uniform or Gaussian prior and a fixed or estimated noise
//! scale. Emits a `param,mean,sd` CSV, the full covariance as a separate
//! CSV, and a manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;

use sketchreg_core::bayes::{self, PriorSpec};
use sketchreg_core::linalg::{self, DenseMatrix};

use crate::data::{write_csv, RowStream};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::sketch_io::SketchFile;

#[derive(Debug, Args)]
pub struct PosteriorArgs {
    /// Input sketch file.
    #[arg(long)]
    pub sketch: PathBuf,
    /// Prior: uniform or gaussian.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    /// CSV vector of the Gaussian prior mean (defaults to zero).
    #[arg(long)]
    pub prior_mean: Option<PathBuf>,
    /// CSV d x d matrix S; the prior covariance is sigma^2 (S^T S)^{-1}.
    #[arg(long)]
    pub prior_s: Option<PathBuf>,
    /// Noise scale: a positive number, or "estimate" to plug in
    /// ||P X b - P Y|| / sqrt(n) at the sketched least-squares solution.
    #[arg(long)]
    pub sigma: String,
    /// Original row count (required with --sigma estimate).
    #[arg(long)]
    pub n: Option<u64>,
    /// Output CSV path; the covariance lands beside it as `<stem>.cov.csv`.
    #[arg(long)]
    pub output: PathBuf,
}

pub fn run(args: &PosteriorArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("posterior");
    manifest.add_input(&args.sketch)?;
    let file = SketchFile::read(&args.sketch)?;
    if file.d_total() < 2 {
        return Err(CliError::contract("sketch needs at least one variable and a response"));
    }
    let design = file.design();
    let response = file.response();
    let d = design.cols();

    let prior = load_prior(args, d)?;

    let solve_start = Instant::now();
    let sigma = match args.sigma.as_str() {
        "estimate" => {
            let n = args.n.ok_or_else(|| {
                CliError::contract("--sigma estimate needs --n (original row count)")
            })?;
            let beta_hat = linalg::ols_solve(&design, &response)?;
            let est = bayes::estimate_sigma(&design, &response, &beta_hat, n)?;
            if !(est > 0.0) {
                return Err(CliError::Numerical(
                    "estimated noise scale is zero (perfect fit); pass --sigma explicitly".into(),
                ));
            }
            eprintln!("estimated sigma = {est}");
            est
        }
        other => other
            .parse::<f64>()
            .map_err(|_| CliError::contract(format!("--sigma must be a number or 'estimate', got {other:?}")))?,
    };

    let post = bayes::posterior_from_data(&design, &response, &prior, sigma)?;
    manifest.record_ms("solve", solve_start);

    write_posterior_csv(&args.output, &post.mean, &post.cov)?;
    manifest.add_output(&args.output);
    let cov_path = cov_path_for(&args.output);
    write_csv(&cov_path, &post.cov)?;
    manifest.add_output(&cov_path);
    manifest.seed = None;
    manifest.write_beside(&args.output)?;
    eprintln!(
        "posterior over {d} coefficients written to {} (covariance: {})",
        args.output.display(),
        cov_path.display()
    );
    Ok(())
}

fn load_prior(args: &PosteriorArgs, d: usize) -> Result<PriorSpec, CliError> {
    match args.prior.as_str() {
        "uniform" => Ok(PriorSpec::Uniform),
        "gaussian" => {
            let s_path = args
                .prior_s
                .as_ref()
                .ok_or_else(|| CliError::contract("gaussian prior needs --prior-s"))?;
            let scale = RowStream::open_csv(s_path, false)?.collect_matrix()?;
            if scale.rows() != d || scale.cols() != d {
                return Err(CliError::contract(format!(
                    "prior scale matrix is {} x {}, expected {d} x {d}",
                    scale.rows(),
                    scale.cols()
                )));
            }
            let mean = match &args.prior_mean {
                None => vec![0.0; d],
                Some(p) => {
                    let m = RowStream::open_csv(p, false)?.collect_matrix()?;
                    let v: Vec<f64> = m.data().to_vec();
                    if v.len() != d {
                        return Err(CliError::contract(format!(
                            "prior mean has {} entries, expected {d}",
                            v.len()
                        )));
                    }
                    v
                }
            };
            Ok(PriorSpec::Gaussian { mean, scale })
        }
        other => Err(CliError::contract(format!(
            "unknown prior {other:?} (expected uniform|gaussian)"
        ))),
    }
}

pub fn cov_path_for(output: &Path) -> PathBuf {
    let stem = output.file_stem().unwrap_or_default().to_string_lossy().to_string();
    output.with_file_name(format!("{stem}.cov.csv"))
}

fn write_posterior_csv(path: &Path, mean: &[f64], cov: &DenseMatrix) -> Result<(), CliError> {
    let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    writeln!(f, "param,mean,sd").map_err(|e| CliError::io(path, e))?;
    for (i, m) in mean.iter().enumerate() {
        let sd = cov.get(i, i).max(0.0).sqrt();
        writeln!(f, "beta_{i},{m},{sd}").map_err(|e| CliError::io(path, e))?;
    }
    Ok(())
}
