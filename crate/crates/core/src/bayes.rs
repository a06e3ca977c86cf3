//! Conjugate Gaussian posteriors on original or sketched regression data.
//!
//! With unit-scaled noise the posterior over the coefficients is the
//! Gaussian whose negative log density is (up to constants)
//! `||X b - Y||^2 + ||S (b - m)||^2`, which is a plain least-squares problem
//! in the augmented system `Z = [X; S]`, `z = [Y; S m]`. A Gaussian prior
//! therefore enters as `d` extra pseudo-observations, and those rows are
//! appended *after* sketching, never distorted: only the data block passes
//! through the embedding.
//!
//! The improper uniform prior over all of `R^d` is a first-class sentinel:
//! it leaves the system untouched rather than being approximated by a
//! near-singular Gaussian.
//!
//! The noise scale is a plug-in value throughout (the posterior is over the
//! coefficients only); [`estimate_sigma`] supplies the default estimator
//! `||P X b - P Y|| / sqrt(n)` from the sketch itself.

use alloc::vec::Vec;
use core::fmt;

use libm::sqrt;

use crate::linalg::{self, DenseMatrix, LinalgError};

#[derive(Debug, Clone, PartialEq)]
pub enum BayesError {
    DimensionMismatch { detail: &'static str },
    /// The (augmented) design matrix is numerically rank deficient, so the
    /// posterior covariance does not exist.
    SingularPosterior,
    /// Prior scale matrix is not full rank.
    SingularPrior,
    NonPositiveSigma { sigma: f64 },
    ZeroRowCount,
    Linalg(LinalgError),
}

impl fmt::Display for BayesError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BayesError::DimensionMismatch { detail } => write!(f, "dimension mismatch: {detail}"),
            BayesError::SingularPosterior => {
                write!(f, "augmented design is rank deficient; posterior is singular")
            }
            BayesError::SingularPrior => write!(f, "prior scale matrix is rank deficient"),
            BayesError::NonPositiveSigma { sigma } => {
                write!(f, "noise scale must be positive, got {sigma}")
            }
            BayesError::ZeroRowCount => write!(f, "original row count must be at least 1"),
            BayesError::Linalg(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for BayesError {}

impl From<LinalgError> for BayesError {
    fn from(e: LinalgError) -> Self {
        BayesError::Linalg(e)
    }
}

/// Noise scale: a fixed plug-in value or the sentinel asking the caller to
/// run [`estimate_sigma`] first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SigmaSpec {
    Fixed(f64),
    Estimate,
}

/// Prior over the regression coefficients.
#[derive(Debug, Clone, PartialEq)]
pub enum PriorSpec {
    /// Improper uniform over `R^d`; the posterior is the bare likelihood
    /// shape.
    Uniform,
    /// Gaussian with mean `m` and covariance `sigma^2 (S^T S)^{-1}`; `scale`
    /// is the full-rank matrix `S`.
    Gaussian { mean: Vec<f64>, scale: DenseMatrix },
}

impl PriorSpec {
    /// Convenience spherical Gaussian: `S = sqrt(lambda) I`, mean zero.
    pub fn ridge(d: usize, lambda: f64) -> PriorSpec {
        let mut scale = DenseMatrix::zeros(d, d);
        let r = sqrt(lambda);
        for i in 0..d {
            scale.set(i, i, r);
        }
        PriorSpec::Gaussian { mean: alloc::vec![0.0; d], scale }
    }
}

/// Gaussian distribution over the coefficients: posterior, prior, or
/// likelihood shape.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeasure {
    pub mean: Vec<f64>,
    pub cov: DenseMatrix,
}

impl GaussianMeasure {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }
}

/// The least-squares system whose normal form defines the posterior:
/// the (possibly sketched) data block stacked over the prior rows. The
/// bottom `d` rows are exactly `[S, S m]`, untouched by any sketch.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedSystem {
    pub design: DenseMatrix,
    pub response: Vec<f64>,
}

impl AugmentedSystem {
    pub fn coefficients(&self) -> usize {
        self.design.cols()
    }
}

/// Stacks the prior under the (sketched) data. A uniform prior passes the
/// system through unchanged; a Gaussian prior appends `S` and `S m`.
pub fn augment(
    sketched_x: &DenseMatrix,
    sketched_y: &[f64],
    prior: &PriorSpec,
) -> Result<AugmentedSystem, BayesError> {
    if sketched_y.len() != sketched_x.rows() {
        return Err(BayesError::DimensionMismatch {
            detail: "response length differs from design row count",
        });
    }
    match prior {
        PriorSpec::Uniform => Ok(AugmentedSystem {
            design: sketched_x.clone(),
            response: sketched_y.to_vec(),
        }),
        PriorSpec::Gaussian { mean, scale } => {
            let d = sketched_x.cols();
            if scale.rows() != d || scale.cols() != d {
                return Err(BayesError::DimensionMismatch {
                    detail: "prior scale matrix is not d x d",
                });
            }
            if mean.len() != d {
                return Err(BayesError::DimensionMismatch {
                    detail: "prior mean length differs from coefficient count",
                });
            }
            let design = sketched_x.vstack(scale)?;
            let mut response = sketched_y.to_vec();
            response.extend(scale.mul_vec(mean)?);
            Ok(AugmentedSystem { design, response })
        }
    }
}

/// Exact conjugate posterior of the augmented system at a fixed noise scale:
/// mean is the least-squares solution, covariance `sigma^2 (Z^T Z)^{-1}`
/// computed from the SVD of `Z`.
pub fn posterior(system: &AugmentedSystem, sigma: f64) -> Result<GaussianMeasure, BayesError> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(BayesError::NonPositiveSigma { sigma });
    }
    let d = system.design.cols();
    let f = linalg::svd(&system.design)?;
    if f.rank() < d {
        return Err(BayesError::SingularPosterior);
    }
    let mean = f.solve_min_norm(&system.response)?;
    // sigma^2 V diag(1/s^2) V^T, symmetrised against rounding.
    let s2 = sigma * sigma;
    let mut cov = DenseMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let mut acc = 0.0;
            for l in 0..d {
                acc += f.v.get(i, l) * f.v.get(j, l) / (f.sigma[l] * f.sigma[l]);
            }
            cov.set(i, j, s2 * acc);
            cov.set(j, i, s2 * acc);
        }
    }
    Ok(GaussianMeasure { mean, cov })
}

/// Posterior directly from a (sketched or raw) regression system and prior.
pub fn posterior_from_data(
    x: &DenseMatrix,
    y: &[f64],
    prior: &PriorSpec,
    sigma: f64,
) -> Result<GaussianMeasure, BayesError> {
    posterior(&augment(x, y, prior)?, sigma)
}

/// Plug-in noise estimate from the sketch: `||P X b - P Y||_2 / sqrt(n)`
/// with `n` the *original* row count.
pub fn estimate_sigma(
    sketched_x: &DenseMatrix,
    sketched_y: &[f64],
    beta_hat: &[f64],
    n: u64,
) -> Result<f64, BayesError> {
    if n == 0 {
        return Err(BayesError::ZeroRowCount);
    }
    if sketched_y.len() != sketched_x.rows() {
        return Err(BayesError::DimensionMismatch {
            detail: "response length differs from design row count",
        });
    }
    let fitted = sketched_x.mul_vec(beta_hat)?;
    let ss: f64 = fitted.iter().zip(sketched_y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(sqrt(ss) / sqrt(n as f64))
}
