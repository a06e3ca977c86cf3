//! `sketchreg verify`: load original data next to its sketch and measure
//! every guarantee -- embedding certification, residual and coefficient
//! bounds, posterior and weight bounds, and the Gram-conditioning
//! comparison. Reports print as key=value lines or JSON; bound violations
//! are reported, not fatal.

use std::path::PathBuf;

use clap::Args;
use serde_json::json;

use sketchreg_core::bayes::{self, PriorSpec};
use sketchreg_core::linalg::{self, DenseMatrix};
use sketchreg_core::metrics;

use crate::commands::parse_format;
use crate::data::{materialize_updates, DataFormat, RowStream};
use crate::error::CliError;
use crate::manifest::RunManifest;
use crate::sketch_io::SketchFile;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Original data file.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "csv", value_parser = parse_format)]
    pub format: DataFormat,
    /// Skip the first CSV line.
    #[arg(long, default_value_t = false)]
    pub has_header: bool,
    /// Prepend the constant 1 column, matching how the sketch was built.
    #[arg(long, default_value_t = false)]
    pub add_intercept: bool,
    /// Row count for update streams.
    #[arg(long)]
    pub n_rows: Option<u64>,
    /// Column count for update streams.
    #[arg(long)]
    pub d_total: Option<usize>,
    /// Sketch file to verify against.
    #[arg(long)]
    pub sketch: PathBuf,
    /// Distortion target for certification and the bounds.
    #[arg(long)]
    pub epsilon: f64,
    /// Prior for the posterior bounds: uniform or gaussian.
    #[arg(long, default_value = "uniform")]
    pub prior: String,
    #[arg(long)]
    pub prior_mean: Option<PathBuf>,
    #[arg(long)]
    pub prior_s: Option<PathBuf>,
    /// Emit a single JSON object instead of key=value lines.
    #[arg(long, default_value_t = false)]
    pub json: bool,
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    let mut manifest = RunManifest::new("verify");
    manifest.add_input(&args.input)?;
    manifest.add_input(&args.sketch)?;

    let sk = SketchFile::read(&args.sketch)?;
    let data = load_data(args)?;
    if data.cols() != sk.d_total() {
        return Err(CliError::contract(format!(
            "data has {} columns (after intercept handling), sketch has {}",
            data.cols(),
            sk.d_total()
        )));
    }
    let d = data.cols() - 1;
    let x = data.columns(0, d);
    let y: Vec<f64> = (0..data.rows()).map(|i| data.get(i, d)).collect();
    let epsilon = args.epsilon;

    let embedding = metrics::verify_embedding(&data, &sk.payload, epsilon)?;

    let sk_x = sk.design();
    let sk_y = sk.response();
    let nu = linalg::ols_solve(&sk_x, &sk_y)?;
    let residual = metrics::check_residual_bound(&x, &y, &nu, epsilon)?;
    let coefficient = metrics::check_coefficient_bound(&x, &y, &nu, epsilon)?;

    let prior = load_prior(args, d)?;
    let exact = bayes::posterior_from_data(&x, &y, &prior, 1.0)?;
    let sketched = bayes::posterior_from_data(&sk_x, &sk_y, &prior, 1.0)?;
    let posterior = metrics::check_posterior_bound(&x, &y, &prior, &exact, &sketched, epsilon)?;
    let system = bayes::augment(&x, &y, &prior)?;
    let weight = metrics::check_weight_bound(&system, &exact, &sketched, epsilon)?;

    let instability = metrics::instability_report(&x, sk.seed())?;

    if args.json {
        let doc = json!({
            "epsilon": epsilon,
            "embedding": {
                "deviation": embedding.deviation,
                "epsilon_target": embedding.epsilon_target,
                "pass": embedding.pass,
                "singular_ratios": embedding.singular_ratios,
            },
            "residual_bound": {
                "relaxed": bound_json(&residual.relaxed),
                "strengthened": bound_json(&residual.strengthened),
            },
            "coefficient_bound": bound_json(&coefficient),
            "posterior_bound": bound_json(&posterior),
            "weight_bound": {
                "rho_star": weight.rho_star,
                "applicable": weight.applicable,
                "condition_number": weight.condition_number,
                "bound": bound_json(&weight.bound),
            },
            "instability": {
                "kappa_x": instability.kappa_x,
                "kappa_gram": instability.kappa_gram,
                "kappa_sketched": instability.kappa_sketched,
                "square_law": instability.square_law,
            },
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("serialisable"));
    } else {
        println!("epsilon={epsilon}");
        print_prefixed("embedding", &embedding.to_string());
        print_prefixed("residual_bound", &residual.to_string());
        print_prefixed("coefficient_bound", &coefficient.to_string());
        print_prefixed("posterior_bound", &posterior.to_string());
        print_prefixed("weight_bound", &weight.to_string());
        print_prefixed("instability", &instability.to_string());
    }
    manifest.write_beside(&args.sketch)?;
    Ok(())
}

fn bound_json(b: &metrics::BoundReport) -> serde_json::Value {
    json!({ "lhs": b.lhs, "rhs": b.rhs, "satisfied": b.satisfied, "slack": b.slack })
}

fn print_prefixed(prefix: &str, body: &str) {
    for line in body.lines() {
        println!("{prefix}.{line}");
    }
}

fn load_data(args: &VerifyArgs) -> Result<DenseMatrix, CliError> {
    let raw = match args.format {
        DataFormat::Updates => {
            let n = args
                .n_rows
                .ok_or_else(|| CliError::contract("update verification needs --n-rows"))?;
            let d = args
                .d_total
                .ok_or_else(|| CliError::contract("update verification needs --d-total"))?;
            materialize_updates(&args.input, n as usize, d)?
        }
        other => RowStream::open(&args.input, other, args.has_header)?.collect_matrix()?,
    };
    if !args.add_intercept {
        return Ok(raw);
    }
    let mut with = DenseMatrix::zeros(raw.rows(), raw.cols() + 1);
    for i in 0..raw.rows() {
        with.set(i, 0, 1.0);
        for j in 0..raw.cols() {
            with.set(i, j + 1, raw.get(i, j));
        }
    }
    Ok(with)
}

fn load_prior(args: &VerifyArgs, d: usize) -> Result<PriorSpec, CliError> {
    match args.prior.as_str() {
        "uniform" => Ok(PriorSpec::Uniform),
        "gaussian" => {
            let s_path = args
                .prior_s
                .as_ref()
                .ok_or_else(|| CliError::contract("gaussian prior needs --prior-s"))?;
            let scale = RowStream::open_csv(s_path, false)?.collect_matrix()?;
            if scale.rows() != d || scale.cols() != d {
                return Err(CliError::contract("prior scale matrix shape mismatch"));
            }
            let mean = match &args.prior_mean {
                None => vec![0.0; d],
                Some(p) => RowStream::open_csv(p, false)?.collect_matrix()?.data().to_vec(),
            };
            if mean.len() != d {
                return Err(CliError::contract("prior mean length mismatch"));
            }
            Ok(PriorSpec::Gaussian { mean, scale })
        }
        other => Err(CliError::contract(format!(
            "unknown prior {other:?} (expected uniform|gaussian)"
        ))),
    }
}
