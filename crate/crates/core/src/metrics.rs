//! Verification layer: certifies that a realised sketch is a subspace
//! embedding, computes exact Wasserstein quantities between Gaussian
//! measures, and evaluates every approximation inequality the embeddings
//! promise, as measurable reports rather than abstract claims.
//!
//! The distance computations are exact (closed-form optimal coupling of
//! Gaussians), so each report carries quantitative slack, not just a
//! boolean.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::fmt::Write as _;

use libm::{fabs, sqrt};

use crate::bayes::{AugmentedSystem, BayesError, GaussianMeasure, PriorSpec};
use crate::hashing::SketchSeed;
use crate::linalg::{self, DenseMatrix, LinalgError};
use crate::sketch::{self, SketchBuilder, SketchError, SketchMethod};

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    /// Original matrix is rank deficient; the embedding test needs a basis.
    RankDeficient,
    /// A covariance failed the symmetric positive-semidefinite check.
    NotPositiveSemidefinite,
    DimensionMismatch { detail: &'static str },
    Linalg(LinalgError),
    Bayes(BayesError),
    Sketch(SketchError),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::RankDeficient => write!(f, "matrix is rank deficient"),
            MetricsError::NotPositiveSemidefinite => {
                write!(f, "covariance is not symmetric positive semidefinite")
            }
            MetricsError::DimensionMismatch { detail } => write!(f, "dimension mismatch: {detail}"),
            MetricsError::Linalg(e) => write!(f, "{e}"),
            MetricsError::Bayes(e) => write!(f, "{e}"),
            MetricsError::Sketch(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for MetricsError {}

impl From<LinalgError> for MetricsError {
    fn from(e: LinalgError) -> Self {
        MetricsError::Linalg(e)
    }
}

impl From<BayesError> for MetricsError {
    fn from(e: BayesError) -> Self {
        MetricsError::Bayes(e)
    }
}

impl From<SketchError> for MetricsError {
    fn from(e: SketchError) -> Self {
        MetricsError::Sketch(e)
    }
}

/// Result of certifying one realised sketch against a distortion target.
#[derive(Debug, Clone)]
pub struct EmbeddingReport {
    /// `|| (PU)^T (PU) - I ||_2` over the column space of the original.
    pub deviation: f64,
    pub epsilon_target: f64,
    /// `deviation <= epsilon_target`.
    pub pass: bool,
    /// Per-index ratio of squared singular values, sketched over original.
    pub singular_ratios: Vec<f64>,
}

impl fmt::Display for EmbeddingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "deviation={}", self.deviation)?;
        writeln!(f, "epsilon_target={}", self.epsilon_target)?;
        writeln!(f, "pass={}", self.pass)?;
        write!(f, "singular_ratios=")?;
        let mut first = true;
        for r in &self.singular_ratios {
            if !first {
                write!(f, ",")?;
            }
            write!(f, "{r}")?;
            first = false;
        }
        Ok(())
    }
}

/// One inequality, measured. `satisfied` applies a mixed tolerance
/// (`lhs <= rhs * (1 + 1e-9) + 1e-12`) so exact-zero cases are not failed
/// on rounding noise.
#[derive(Debug, Clone, Copy)]
pub struct BoundReport {
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    pub slack: f64,
}

impl BoundReport {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        let satisfied = lhs <= rhs * (1.0 + 1e-9) + 1e-12;
        BoundReport { lhs, rhs, satisfied, slack: rhs - lhs }
    }
}

impl fmt::Display for BoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "lhs={}\nrhs={}\nsatisfied={}\nslack={}",
            self.lhs, self.rhs, self.satisfied, self.slack
        )
    }
}

/// Certifies a sketch against the embedding definition: recovers the image
/// of the original's orthonormal basis as `PU = sketched * V * Sigma^{-1}`
/// and measures `||(PU)^T (PU) - I||_2`. Also reports how each squared
/// singular value moved.
pub fn verify_embedding(
    original: &DenseMatrix,
    sketched: &DenseMatrix,
    epsilon: f64,
) -> Result<EmbeddingReport, MetricsError> {
    if original.cols() != sketched.cols() {
        return Err(MetricsError::DimensionMismatch {
            detail: "original and sketched column counts differ",
        });
    }
    let d = original.cols();
    let f = linalg::svd(original)?;
    if f.rank() < d {
        return Err(MetricsError::RankDeficient);
    }
    // P U = sketched * V * diag(1/sigma).
    let mut vs = f.v.clone();
    for i in 0..vs.rows() {
        let row = vs.row_mut(i);
        for j in 0..d {
            row[j] /= f.sigma[j];
        }
    }
    let pu = sketched.matmul(&vs)?;
    let mut gram = pu.transpose().matmul(&pu)?;
    for i in 0..d {
        gram.set(i, i, gram.get(i, i) - 1.0);
    }
    let deviation = linalg::spectral_norm(&gram)?;

    let sk = linalg::svd(sketched)?;
    let pairs = sk.sigma.len().min(f.sigma.len());
    let mut singular_ratios = Vec::with_capacity(pairs);
    for i in 0..pairs {
        let orig2 = f.sigma[i] * f.sigma[i];
        singular_ratios.push(sk.sigma[i] * sk.sigma[i] / orig2);
    }
    Ok(EmbeddingReport { deviation, epsilon_target: epsilon, pass: deviation <= epsilon, singular_ratios })
}

/// Symmetric PSD square root via eigendecomposition, clamping rounding-level
/// negative eigenvalues to zero.
fn spd_sqrt(a: &DenseMatrix) -> Result<DenseMatrix, MetricsError> {
    let (eig, v) = linalg::sym_eig(a)?;
    let scale = eig.first().map(|e| fabs(*e)).unwrap_or(0.0);
    let d = a.rows();
    let mut out = DenseMatrix::zeros(d, d);
    for l in 0..d {
        let lam = eig[l];
        if lam < -1e-9 * scale.max(1.0) {
            return Err(MetricsError::NotPositiveSemidefinite);
        }
        let r = sqrt(lam.max(0.0));
        if r == 0.0 {
            continue;
        }
        for i in 0..d {
            let vi = v.get(i, l) * r;
            if vi == 0.0 {
                continue;
            }
            for j in 0..d {
                out.set(i, j, out.get(i, j) + vi * v.get(j, l));
            }
        }
    }
    Ok(out)
}

fn check_covariance(c: &DenseMatrix) -> Result<(), MetricsError> {
    if c.rows() != c.cols() {
        return Err(MetricsError::DimensionMismatch { detail: "covariance is not square" });
    }
    let scale = c.max_abs().max(1.0);
    for i in 0..c.rows() {
        for j in (i + 1)..c.cols() {
            if fabs(c.get(i, j) - c.get(j, i)) > 1e-10 * scale {
                return Err(MetricsError::NotPositiveSemidefinite);
            }
        }
    }
    Ok(())
}

/// Exact 2-Wasserstein distance between Gaussian measures:
/// `sqrt(||m1 - m2||^2 + tr(C1 + C2 - 2 (C2^{1/2} C1 C2^{1/2})^{1/2}))`.
/// Covariances must be symmetric positive semidefinite.
pub fn w2_gaussian(p: &GaussianMeasure, q: &GaussianMeasure) -> Result<f64, MetricsError> {
    if p.dim() != q.dim() {
        return Err(MetricsError::DimensionMismatch { detail: "measure dimensions differ" });
    }
    check_covariance(&p.cov)?;
    check_covariance(&q.cov)?;
    let mean_sq: f64 = p.mean.iter().zip(&q.mean).map(|(a, b)| (a - b) * (a - b)).sum();

    let rq = spd_sqrt(&q.cov)?;
    let cross = rq.matmul(&p.cov)?.matmul(&rq)?;
    let cross_root = spd_sqrt(&cross)?;
    let mut trace_term = 0.0;
    for i in 0..p.dim() {
        trace_term += p.cov.get(i, i) + q.cov.get(i, i) - 2.0 * cross_root.get(i, i);
    }
    // The trace term is nonnegative in exact arithmetic.
    Ok(sqrt(mean_sq + trace_term.max(0.0)))
}

/// Wasserstein weight: distance to the point mass at the origin,
/// `sqrt(||mean||^2 + tr(cov))` (the square root of the second moment).
pub fn wasserstein_weight(p: &GaussianMeasure) -> f64 {
    let mean_sq: f64 = p.mean.iter().map(|a| a * a).sum();
    let mut tr = 0.0;
    for i in 0..p.dim() {
        tr += p.cov.get(i, i);
    }
    sqrt(mean_sq + tr.max(0.0))
}

/// Residual bound of sketched least squares, in both strengths.
#[derive(Debug, Clone, Copy)]
pub struct ResidualCheck {
    /// `||X nu - Y||^2 <= (1 + eps) ||X gamma - Y||^2`.
    pub relaxed: BoundReport,
    /// The sharper `(1 + eps^2)` variant.
    pub strengthened: BoundReport,
}

impl fmt::Display for ResidualCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "relaxed.{}", indent_kv(&self.relaxed))?;
        write!(f, "strengthened.{}", indent_kv(&self.strengthened))
    }
}

fn indent_kv(b: &BoundReport) -> String {
    let mut s = String::new();
    let _ = write!(s, "lhs={} rhs={} satisfied={} slack={}", b.lhs, b.rhs, b.satisfied, b.slack);
    s
}

fn residual_sq(x: &DenseMatrix, y: &[f64], beta: &[f64]) -> Result<f64, MetricsError> {
    let fitted = x.mul_vec(beta)?;
    Ok(fitted.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Measures the sketched-solution residual against the optimal one:
/// `||X nu - Y||^2` vs `(1 + eps) ||X gamma - Y||^2`, plus the
/// `(1 + eps^2)` strengthening.
pub fn check_residual_bound(
    x: &DenseMatrix,
    y: &[f64],
    nu: &[f64],
    epsilon: f64,
) -> Result<ResidualCheck, MetricsError> {
    let gamma = linalg::ols_solve(x, y)?;
    let opt = residual_sq(x, y, &gamma)?;
    let got = residual_sq(x, y, nu)?;
    Ok(ResidualCheck {
        relaxed: BoundReport::new(got, (1.0 + epsilon) * opt),
        strengthened: BoundReport::new(got, (1.0 + epsilon * epsilon) * opt),
    })
}

/// Measures the distance between the optimal and sketched coefficients:
/// `||gamma - nu||^2` vs `(eps^2 / sigma_min^2(X)) ||X gamma - Y||^2`.
pub fn check_coefficient_bound(
    x: &DenseMatrix,
    y: &[f64],
    nu: &[f64],
    epsilon: f64,
) -> Result<BoundReport, MetricsError> {
    let f = linalg::svd(x)?;
    if f.rank() < x.cols() {
        return Err(MetricsError::RankDeficient);
    }
    let gamma = f.solve_min_norm(y)?;
    let lhs: f64 = gamma.iter().zip(nu).map(|(a, b)| (a - b) * (a - b)).sum();
    let opt = residual_sq(x, y, &gamma)?;
    let smin = f.sigma_min();
    Ok(BoundReport::new(lhs, epsilon * epsilon / (smin * smin) * opt))
}

/// Measures the squared Wasserstein distance between the exact and sketched
/// posteriors against its guarantee
/// `(eps^2 / sigma_min^2(Z)) ||Z mu - z||^2 + eps^2 tr((Z^T Z)^{-1})`,
/// where `Z, z` is the prior-augmented system of the *original* data and
/// `mu` the exact posterior mean. Posterior shapes are taken at unit noise
/// scale, matching the bound's normalisation.
pub fn check_posterior_bound(
    x: &DenseMatrix,
    y: &[f64],
    prior: &PriorSpec,
    exact: &GaussianMeasure,
    sketched: &GaussianMeasure,
    epsilon: f64,
) -> Result<BoundReport, MetricsError> {
    let system = crate::bayes::augment(x, y, prior)?;
    let f = linalg::svd(&system.design)?;
    if f.rank() < system.design.cols() {
        return Err(MetricsError::RankDeficient);
    }
    if exact.dim() != system.design.cols() {
        return Err(MetricsError::DimensionMismatch {
            detail: "posterior dimension differs from coefficient count",
        });
    }
    let dist = w2_gaussian(exact, sketched)?;
    let lhs = dist * dist;

    let res = residual_sq(&system.design, &system.response, &exact.mean)?;
    let smin = f.sigma_min();
    let trace_inv: f64 = f.sigma.iter().map(|s| 1.0 / (s * s)).sum();
    let e2 = epsilon * epsilon;
    Ok(BoundReport::new(lhs, e2 / (smin * smin) * res + e2 * trace_inv))
}

/// Weight-ratio check: is the sketched posterior's Wasserstein weight within
/// `(1 + kappa(Z) eps / rho)` of the exact one, under the explained-response
/// hypothesis `||Z mu|| >= rho ||z||`?
#[derive(Debug, Clone, Copy)]
pub struct WeightBoundReport {
    /// Measured `||Z mu|| / ||z||`, the sharpest admissible `rho`.
    pub rho_star: f64,
    /// False when the hypothesis fails (`rho_star = 0`), in which case the
    /// bound is vacuous and `bound` is reported for information only.
    pub applicable: bool,
    pub condition_number: f64,
    pub bound: BoundReport,
}

impl fmt::Display for WeightBoundReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rho_star={}", self.rho_star)?;
        writeln!(f, "applicable={}", self.applicable)?;
        writeln!(f, "condition_number={}", self.condition_number)?;
        write!(f, "{}", self.bound)
    }
}

pub fn check_weight_bound(
    system: &AugmentedSystem,
    exact: &GaussianMeasure,
    sketched: &GaussianMeasure,
    epsilon: f64,
) -> Result<WeightBoundReport, MetricsError> {
    let f = linalg::svd(&system.design)?;
    if f.rank() < system.design.cols() {
        return Err(MetricsError::RankDeficient);
    }
    let kappa = f.sigma_max() / f.sigma_min();
    let zmu = system.design.mul_vec(&exact.mean)?;
    let zmu_norm = sqrt(zmu.iter().map(|v| v * v).sum::<f64>());
    let z_norm = sqrt(system.response.iter().map(|v| v * v).sum::<f64>());
    let rho_star = if z_norm > 0.0 { (zmu_norm / z_norm).min(1.0) } else { 0.0 };
    let applicable = rho_star > 0.0;

    let lhs = wasserstein_weight(sketched);
    let exact_weight = wasserstein_weight(exact);
    let rhs = if applicable {
        (1.0 + kappa * epsilon / rho_star) * exact_weight
    } else {
        f64::INFINITY
    };
    Ok(WeightBoundReport {
        rho_star,
        applicable,
        condition_number: kappa,
        bound: BoundReport::new(lhs, rhs),
    })
}

/// Conditioning comparison of the raw data, its Gram matrix, and a sketch.
///
/// `square_law` records whether `kappa(X^T X) >= kappa(X)^1.9` whenever
/// `kappa(X) >= 10^3` (None below that threshold); the near-squaring is the
/// mechanism behind the Gram baseline's numerical collapse.
#[derive(Debug, Clone, Copy)]
pub struct InstabilityReport {
    pub kappa_x: f64,
    pub kappa_gram: f64,
    pub kappa_sketched: f64,
    pub square_law: Option<bool>,
}

impl fmt::Display for InstabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "kappa_x={}", self.kappa_x)?;
        writeln!(f, "kappa_gram={}", self.kappa_gram)?;
        writeln!(f, "kappa_sketched={}", self.kappa_sketched)?;
        match self.square_law {
            Some(v) => write!(f, "square_law={v}"),
            None => write!(f, "square_law=n/a"),
        }
    }
}

/// Compares `kappa(X)`, `kappa(X^T X)`, and `kappa(P X)` for a dense sign
/// sketch at distortion 0.1 drawn from `seed`.
pub fn instability_report(
    x: &DenseMatrix,
    seed: SketchSeed,
) -> Result<InstabilityReport, MetricsError> {
    let kappa_x = linalg::condition_number(x)?;
    let gram = x.transpose().matmul(x)?;
    let kappa_gram = linalg::condition_number(&gram)?;

    let epsilon = 0.1;
    let k = sketch::target_dimension(SketchMethod::Rad, x.cols(), epsilon, 0.1)?;
    let mut builder = SketchBuilder::new(SketchMethod::Rad, x.cols(), k, None, seed)?;
    builder.push_matrix(0, x)?;
    let sketched = builder.finalize();
    let kappa_sketched = linalg::condition_number(&sketched)?;

    let square_law = if kappa_x >= 1e3 {
        Some(kappa_gram >= libm::pow(kappa_x, 1.9))
    } else {
        None
    };
    Ok(InstabilityReport { kappa_x, kappa_gram, kappa_sketched, square_law })
}
