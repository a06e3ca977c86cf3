//! Synthetic regression data generator.
//!
//! Coefficients follow a sign-symmetric zero-inflated Poisson: each is 0
//! with probability `zero_inflation`, otherwise a Poisson(`poisson_mean`)
//! draw whose sign flips with probability 1/2 (a Poisson draw of 0 stays 0,
//! so the exact zero mass is `p + (1-p) e^{-lambda}`). Column means are
//! `N(0, col_mean_sd^2)`, entries of `X` are `N(mean_j, x_var)`, and the
//! response is `X beta` plus `N(0, sigma^2)` noise.
//!
//! Generation is streaming and deterministic: a fixed seed yields a
//! bitwise-identical row sequence, row by row, regardless of how many rows
//! the consumer pulls at a time.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use sketchreg_core::linalg::DenseMatrix;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: u64,
    pub d: usize,
    pub sigma: f64,
    pub seed: u64,
    /// Probability that a coefficient is structurally zero.
    pub zero_inflation: f64,
    /// Mean of the Poisson magnitude for active coefficients.
    pub poisson_mean: f64,
    /// Standard deviation of the column means.
    pub col_mean_sd: f64,
    /// Variance of the entries of `X` around their column mean.
    pub x_var: f64,
}

impl SimConfig {
    pub fn new(n: u64, d: usize, sigma: f64, seed: u64) -> SimConfig {
        SimConfig {
            n,
            d,
            sigma,
            seed,
            zero_inflation: 0.5,
            poisson_mean: 3.0,
            col_mean_sd: 5.0,
            x_var: 4.0,
        }
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.d == 0 {
            return Err(CliError::contract("simulation needs at least one variable"));
        }
        if !(0.0..=1.0).contains(&self.zero_inflation) {
            return Err(CliError::contract(format!(
                "zero inflation {} outside [0, 1]",
                self.zero_inflation
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(CliError::contract(format!("sigma {} must be positive", self.sigma)));
        }
        if !(self.x_var > 0.0) || !(self.col_mean_sd >= 0.0) || !(self.poisson_mean >= 0.0) {
            return Err(CliError::contract("variance parameters must be positive"));
        }
        Ok(())
    }
}

/// Streaming generator: coefficients and column means are drawn up front,
/// then each call to [`Simulator::next_row`] emits one `[x, y]` row.
pub struct Simulator {
    beta: Vec<f64>,
    col_means: Vec<f64>,
    sigma: f64,
    x_sd: f64,
    rng: ChaCha8Rng,
    emitted: u64,
    n: u64,
}

impl Simulator {
    pub fn new(cfg: &SimConfig) -> Result<Simulator, CliError> {
        cfg.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let beta = draw_coefficients(&mut rng, cfg);
        let col_means: Vec<f64> = (0..cfg.d)
            .map(|_| cfg.col_mean_sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        Ok(Simulator {
            beta,
            col_means,
            sigma: cfg.sigma,
            x_sd: cfg.x_var.sqrt(),
            rng,
            emitted: 0,
            n: cfg.n,
        })
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn col_means(&self) -> &[f64] {
        &self.col_means
    }

    /// Fills `buf` (length `d + 1`) with the next `[x, y]` row; returns
    /// false once `n` rows have been emitted.
    pub fn next_row(&mut self, buf: &mut [f64]) -> bool {
        if self.emitted >= self.n {
            return false;
        }
        let d = self.beta.len();
        debug_assert_eq!(buf.len(), d + 1);
        let mut y = 0.0;
        for j in 0..d {
            let x = self.col_means[j] + self.x_sd * self.rng.sample::<f64, _>(StandardNormal);
            buf[j] = x;
            y += x * self.beta[j];
        }
        buf[d] = y + self.sigma * self.rng.sample::<f64, _>(StandardNormal);
        self.emitted += 1;
        true
    }
}

fn draw_coefficients(rng: &mut ChaCha8Rng, cfg: &SimConfig) -> Vec<f64> {
    (0..cfg.d)
        .map(|_| {
            if rng.gen::<f64>() < cfg.zero_inflation {
                0.0
            } else {
                let magnitude = poisson(rng, cfg.poisson_mean) as f64;
                if rng.gen::<bool>() {
                    -magnitude
                } else {
                    magnitude
                }
            }
        })
        .collect()
}

/// Poisson sampler by CDF inversion; one uniform per draw. Fine for the
/// small means used here.
fn poisson(rng: &mut ChaCha8Rng, lambda: f64) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let u: f64 = rng.gen();
    let mut p = (-lambda).exp();
    let mut cdf = p;
    let mut k = 0u64;
    while u > cdf && k < 10_000 {
        k += 1;
        p *= lambda / k as f64;
        cdf += p;
    }
    k
}

/// Materialised simulation: `(X, Y, beta_true)`.
pub fn simulate(cfg: &SimConfig) -> Result<(DenseMatrix, Vec<f64>, Vec<f64>), CliError> {
    let mut sim = Simulator::new(cfg)?;
    let d = cfg.d;
    let n = cfg.n as usize;
    let mut x = DenseMatrix::zeros(n, d);
    let mut y = vec![0.0; n];
    let mut buf = vec![0.0; d + 1];
    for i in 0..n {
        sim.next_row(&mut buf);
        x.row_mut(i).copy_from_slice(&buf[..d]);
        y[i] = buf[d];
    }
    let beta = sim.beta().to_vec();
    Ok((x, y, beta))
}

/// Simulation output as the combined `[X, Y]` matrix.
pub fn simulate_combined(cfg: &SimConfig) -> Result<(DenseMatrix, Vec<f64>), CliError> {
    let mut sim = Simulator::new(cfg)?;
    let d = cfg.d;
    let n = cfg.n as usize;
    let mut data = DenseMatrix::zeros(n, d + 1);
    let mut buf = vec![0.0; d + 1];
    for i in 0..n {
        sim.next_row(&mut buf);
        data.row_mut(i).copy_from_slice(&buf);
    }
    let beta = sim.beta().to_vec();
    Ok((data, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproducible_bitwise() {
        let cfg = SimConfig::new(500, 8, 2.0, 42);
        let (x1, y1, b1) = simulate(&cfg).unwrap();
        let (x2, y2, b2) = simulate(&cfg).unwrap();
        assert_eq!(x1, x2);
        assert_eq!(y1, y2);
        assert_eq!(b1, b2);

        let other = SimConfig::new(500, 8, 2.0, 43);
        let (x3, _, _) = simulate(&other).unwrap();
        assert_ne!(x1, x3);
    }

    #[test]
    fn zero_coefficient_mass_matches_mixture() {
        // P(beta = 0) = p + (1 - p) e^{-lambda} ~ 0.5249 at the defaults.
        let cfg = SimConfig::new(1, 100_000, 1.0, 7);
        let (_, _, beta) = simulate(&cfg).unwrap();
        let zeros = beta.iter().filter(|&&b| b == 0.0).count() as f64;
        let frac = zeros / beta.len() as f64;
        let want = 0.5 + 0.5 * (-3.0f64).exp();
        assert!((frac - want).abs() < 0.01, "zero fraction {frac} vs {want}");
    }

    #[test]
    fn column_variance_near_four() {
        let cfg = SimConfig::new(100_000, 3, 1.0, 11);
        let (x, _, _) = simulate(&cfg).unwrap();
        for j in 0..3 {
            let n = x.rows() as f64;
            let mean: f64 = (0..x.rows()).map(|i| x.get(i, j)).sum::<f64>() / n;
            let var: f64 =
                (0..x.rows()).map(|i| (x.get(i, j) - mean).powi(2)).sum::<f64>() / (n - 1.0);
            assert!((var - 4.0).abs() < 0.2, "column {j} variance {var}");
        }
    }

    #[test]
    fn residual_sd_matches_sigma() {
        let sigma = 2.5;
        let mut cfg = SimConfig::new(100_000, 5, sigma, 13);
        cfg.x_var = 4.0;
        let (x, y, beta) = simulate(&cfg).unwrap();
        let fitted = x.mul_vec(&beta).unwrap();
        let n = y.len() as f64;
        let ss: f64 = fitted.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum();
        let sd = (ss / n).sqrt();
        assert!((sd - sigma).abs() < 0.05 * sigma, "residual sd {sd}");
    }

    #[test]
    fn streaming_matches_materialised() {
        let cfg = SimConfig::new(200, 4, 1.5, 21);
        let (data, beta) = simulate_combined(&cfg).unwrap();
        let mut sim = Simulator::new(&cfg).unwrap();
        assert_eq!(sim.beta(), &beta[..]);
        let mut buf = vec![0.0; 5];
        for i in 0..200 {
            assert!(sim.next_row(&mut buf));
            assert_eq!(&buf[..], data.row(i));
        }
        assert!(!sim.next_row(&mut buf));
    }

    #[test]
    fn rejects_invalid_configs() {
        let mut cfg = SimConfig::new(10, 0, 1.0, 1);
        assert!(Simulator::new(&cfg).is_err());
        cfg = SimConfig::new(10, 2, 0.0, 1);
        assert!(Simulator::new(&cfg).is_err());
        cfg = SimConfig::new(10, 2, 1.0, 1);
        cfg.zero_inflation = 1.5;
        assert!(Simulator::new(&cfg).is_err());
    }
}
