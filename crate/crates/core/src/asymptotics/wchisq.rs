//! Law of `Σ λ_j Z_j²` with `Z_j` iid standard normal, by seeded Monte Carlo.

use rand_distr::{Distribution, StandardNormal};

use super::expectation::DEFAULT_DRAWS;
use crate::error::{LqError, Result};
use crate::seed;

pub const DEFAULT_WCHISQ_SEED: u64 = 0x00C0_FFEE;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedChiSquare {
    lambdas: Vec<f64>,
    sorted: Vec<f64>,
    seed: u64,
}

impl WeightedChiSquare {
    pub fn new(lambdas: &[f64]) -> Result<Self> {
        Self::with_draws(lambdas, DEFAULT_DRAWS, DEFAULT_WCHISQ_SEED)
    }

    pub fn with_draws(lambdas: &[f64], draws: usize, seed: u64) -> Result<Self> {
        if lambdas.is_empty() {
            return Err(LqError::InvalidParameter("no weights given".into()));
        }
        if let Some(bad) = lambdas.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(LqError::InvalidParameter(format!("weights must be positive, got {bad}")));
        }
        if draws < 100 {
            return Err(LqError::InvalidParameter("need at least 100 draws".into()));
        }
        let mut rng = seed::rng_for(seed, &[lambdas.len() as u64]);
        let mut sorted: Vec<f64> = (0..draws)
            .map(|_| {
                lambdas
                    .iter()
                    .map(|l| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        l * z * z
                    })
                    .sum()
            })
            .collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(Self { lambdas: lambdas.to_vec(), sorted, seed })
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn draws(&self) -> usize {
        self.sorted.len()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Empirical `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.sorted.partition_point(|&v| v <= x) as f64 / self.sorted.len() as f64
    }

    /// `√(F(1-F)/N)`.
    pub fn cdf_stderr(&self, x: f64) -> f64 {
        let f = self.cdf(x);
        (f * (1.0 - f) / self.sorted.len() as f64).sqrt()
    }

    /// Smallest sample value whose empirical cdf reaches `prob`.
    pub fn quantile(&self, prob: f64) -> Result<f64> {
        if !(prob > 0.0 && prob < 1.0) {
            return Err(LqError::InvalidParameter(format!("probability must be in (0, 1), got {prob}")));
        }
        let n = self.sorted.len();
        let k = ((prob * n as f64).ceil() as usize).clamp(1, n);
        Ok(self.sorted[k - 1])
    }

    /// Order-statistic standard error: `√(p(1-p)/N)` divided by a
    /// difference-quotient density estimate.
    pub fn quantile_stderr(&self, prob: f64) -> Result<f64> {
        let h = (0.005f64).min(prob / 2.0).min((1.0 - prob) / 2.0);
        let dens = 2.0 * h / (self.quantile(prob + h)? - self.quantile(prob - h)?);
        Ok((prob * (1.0 - prob) / self.sorted.len() as f64).sqrt() / dens)
    }
}

/// `P(Σ λ_j Z_j² ≤ x)` with the default draw count and seed.
pub fn weighted_chisq_cdf(lambdas: &[f64], x: f64) -> Result<f64> {
    Ok(WeightedChiSquare::new(lambdas)?.cdf(x))
}

pub fn weighted_chisq_quantile(lambdas: &[f64], prob: f64) -> Result<f64> {
    WeightedChiSquare::new(lambdas)?.quantile(prob)
}
