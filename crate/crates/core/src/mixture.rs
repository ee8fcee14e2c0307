//! Gross-error models `h(x) = (1 - ε) f(x; θ_f) + ε g(x)`.
//!
//! The contamination `g` is Gaussian. A near point mass is a Gaussian with
//! variance [`POINT_MASS_VARIANCE`].
//!
//! Convention: the second argument of `φ(x; m, v)` is a **variance**, so a
//! contaminant written `φ(x; 0, 50)` has standard deviation `√50`.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LqError, Result};
use crate::family::{Family, MultivariateNormalKnownCovariance, ParametricFamily};

/// Variance used to approximate a point mass.
pub const POINT_MASS_VARIANCE: f64 = 1e-4;

/// Gaussian contamination density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: Vec<f64>,
    pub covariance: MultivariateNormalKnownCovariance,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if mean.len() != cov.nrows() {
            return Err(LqError::InvalidParameter("mean/covariance dimension mismatch".into()));
        }
        Ok(Self { mean, covariance: MultivariateNormalKnownCovariance::new(cov)? })
    }

    /// `φ(x; mean, variance)`.
    pub fn univariate(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0) {
            return Err(LqError::InvalidParameter(format!("variance must be positive, got {variance}")));
        }
        Self::new(vec![mean], DMatrix::from_element(1, 1, variance))
    }

    pub fn point_mass(location: f64) -> Self {
        Self::univariate(location, POINT_MASS_VARIANCE).expect("positive variance")
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        self.covariance.log_density(x, &self.mean)
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        self.log_density(x).exp()
    }

    pub fn sample_into<R: Rng>(&self, rng: &mut R, out: &mut Vec<f64>) {
        self.covariance.sample_into(&self.mean, rng, out);
    }

    /// Standard deviation along one axis.
    pub fn axis_sd(&self, axis: usize) -> f64 {
        self.covariance.covariance()[(axis, axis)].sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrossErrorModel {
    pub family: Family,
    pub theta: Vec<f64>,
    pub contamination: Gaussian,
    pub epsilon: f64,
}

impl GrossErrorModel {
    pub fn new(family: Family, theta: Vec<f64>, contamination: Gaussian, epsilon: f64) -> Result<Self> {
        family.validate_theta(&theta)?;
        if !(0.0..1.0).contains(&epsilon) {
            return Err(LqError::InvalidParameter(format!("epsilon must be in [0, 1), got {epsilon}")));
        }
        if contamination.dim() != family.dim_x() {
            return Err(LqError::InvalidParameter(
                "contamination dimension differs from the observation dimension".into(),
            ));
        }
        Ok(Self { family, theta, contamination, epsilon })
    }

    pub fn dim_x(&self) -> usize {
        self.family.dim_x()
    }

    /// `h(x)`.
    pub fn density(&self, x: &[f64]) -> f64 {
        let clean = self.family.density(x, &self.theta);
        if self.epsilon == 0.0 {
            return clean;
        }
        (1.0 - self.epsilon) * clean + self.epsilon * self.contamination.density(x)
    }

    /// Draw `n` observations and whether each came from `g`.
    pub fn sample_labeled<R: Rng>(&self, n: usize, rng: &mut R) -> (Vec<f64>, Vec<bool>) {
        let mut out = Vec::with_capacity(n * self.dim_x());
        let mut labels = Vec::with_capacity(n);
        for _ in 0..n {
            let from_g = self.epsilon > 0.0 && rng.random::<f64>() < self.epsilon;
            if from_g {
                self.contamination.sample_into(rng, &mut out);
            } else {
                self.family.sample_into(&self.theta, rng, &mut out);
            }
            labels.push(from_g);
        }
        (out, labels)
    }

    pub fn sample_with<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        self.sample_labeled(n, rng).0
    }

    /// Deterministic sample from a seed.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }
}
