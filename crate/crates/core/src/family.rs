//! Parametric density families `f(x; θ)` with closed-form derivatives.
//!
//! Observations are stored flat: a sample of `n` points from a family with
//! `dim_x() == d` is a `&[f64]` of length `n * d`, iterated with
//! `chunks_exact(d)`.
//!
//! Every family also knows how to solve its own *weighted* likelihood
//! equation in closed form. That single capability is what the MLqE solver
//! needs, since the Lq-likelihood equation is a weighted likelihood equation
//! with weights `f^{1-q}`.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{LqError, Result};

/// Floor applied to scale parameters during estimation.
pub const MIN_SCALE: f64 = 1e-6;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Consistency factor turning a MAD into a normal standard deviation.
pub const MAD_TO_SD: f64 = 1.4826;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Support {
    Real,
    RealVector(usize),
}

pub trait ParametricFamily: Send + Sync {
    /// Number of parameters `p`.
    fn dim_theta(&self) -> usize;

    /// Dimension of one observation.
    fn dim_x(&self) -> usize;

    fn support(&self) -> Support;

    fn log_density(&self, x: &[f64], theta: &[f64]) -> f64;

    fn density(&self, x: &[f64], theta: &[f64]) -> f64 {
        self.log_density(x, theta).exp()
    }

    /// `∂/∂θ log f(x; θ)`.
    fn score(&self, x: &[f64], theta: &[f64]) -> DVector<f64>;

    /// `∂²/∂θ² log f(x; θ)`.
    fn log_density_hess(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64>;

    /// `f'_θ = f · score`.
    fn density_grad(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        self.score(x, theta) * self.density(x, theta)
    }

    /// `f''_θ = f · (H_log + s sᵀ)`.
    fn density_hess(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        let s = self.score(x, theta);
        (self.log_density_hess(x, theta) + &s * s.transpose()) * self.density(x, theta)
    }

    /// Draw one observation, appending `dim_x()` values to `out`.
    fn sample_into(&self, theta: &[f64], rng: &mut dyn RngCore, out: &mut Vec<f64>);

    /// Overwrite the free coordinates of `theta` with the maximiser of
    /// `Σ w_i log f(x_i; θ)`, holding the others at their current value.
    fn weighted_mle(&self, data: &[f64], weights: &[f64], theta: &mut [f64], free: &[bool]);

    /// Robust starting point (medians and MAD-based scales).
    fn initial_estimate(&self, data: &[f64]) -> Result<Vec<f64>>;

    /// The observation axis a coordinate translates, if it is a location
    /// parameter.
    fn location_axis(&self, coord: usize) -> Option<usize>;

    fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim_theta() {
            return Err(LqError::InvalidParameter(format!(
                "expected {} parameters, got {}",
                self.dim_theta(),
                theta.len()
            )));
        }
        if theta.iter().any(|v| !v.is_finite()) {
            return Err(LqError::InvalidParameter("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Typical spread of one observation axis at `theta`, used to size
    /// integration ranges.
    fn axis_scale(&self, theta: &[f64], axis: usize) -> f64;

    /// Closed-form maximum likelihood estimate.
    fn mle(&self, data: &[f64]) -> Result<Vec<f64>> {
        let mut theta = self.initial_estimate(data)?;
        let n = data.len() / self.dim_x();
        let free = vec![true; self.dim_theta()];
        self.weighted_mle(data, &vec![1.0; n], &mut theta, &free);
        Ok(theta)
    }
}

/// `N(μ, σ²)` with `σ` known; `θ = (μ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalKnownVariance {
    pub sigma: f64,
}

impl NormalKnownVariance {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma > 0.0 && sigma.is_finite() {
            Ok(Self { sigma })
        } else {
            Err(LqError::InvalidParameter(format!("sigma must be positive, got {sigma}")))
        }
    }

    pub fn standard() -> Self {
        Self { sigma: 1.0 }
    }
}

impl ParametricFamily for NormalKnownVariance {
    fn dim_theta(&self) -> usize {
        1
    }
    fn dim_x(&self) -> usize {
        1
    }
    fn support(&self) -> Support {
        Support::Real
    }

    #[inline]
    fn log_density(&self, x: &[f64], theta: &[f64]) -> f64 {
        let z = (x[0] - theta[0]) / self.sigma;
        -0.5 * z * z - self.sigma.ln() - LN_SQRT_2PI
    }

    fn score(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        DVector::from_element(1, (x[0] - theta[0]) / (self.sigma * self.sigma))
    }

    fn log_density_hess(&self, _x: &[f64], _theta: &[f64]) -> DMatrix<f64> {
        DMatrix::from_element(1, 1, -1.0 / (self.sigma * self.sigma))
    }

    fn sample_into(&self, theta: &[f64], rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let z: f64 = StandardNormal.sample(rng);
        out.push(theta[0] + self.sigma * z);
    }

    fn weighted_mle(&self, data: &[f64], weights: &[f64], theta: &mut [f64], free: &[bool]) {
        if free[0] {
            if let Some(m) = weighted_mean(data, weights) {
                theta[0] = m;
            }
        }
    }

    fn initial_estimate(&self, data: &[f64]) -> Result<Vec<f64>> {
        require_points(data, 1)?;
        Ok(vec![median(data)])
    }

    fn location_axis(&self, coord: usize) -> Option<usize> {
        (coord == 0).then_some(0)
    }

    fn axis_scale(&self, _theta: &[f64], _axis: usize) -> f64 {
        self.sigma
    }

    fn mle(&self, data: &[f64]) -> Result<Vec<f64>> {
        require_points(data, 1)?;
        Ok(vec![mean(data)])
    }
}

/// `N(μ, σ²)` with both unknown; `θ = (μ, σ)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalLocationScale;

impl ParametricFamily for NormalLocationScale {
    fn dim_theta(&self) -> usize {
        2
    }
    fn dim_x(&self) -> usize {
        1
    }
    fn support(&self) -> Support {
        Support::Real
    }

    #[inline]
    fn log_density(&self, x: &[f64], theta: &[f64]) -> f64 {
        let sigma = theta[1];
        if !(sigma > 0.0) {
            return f64::NEG_INFINITY;
        }
        let z = (x[0] - theta[0]) / sigma;
        -0.5 * z * z - sigma.ln() - LN_SQRT_2PI
    }

    fn score(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        let (d, s) = (x[0] - theta[0], theta[1]);
        let s2 = s * s;
        DVector::from_vec(vec![d / s2, -1.0 / s + d * d / (s2 * s)])
    }

    fn log_density_hess(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        let (d, s) = (x[0] - theta[0], theta[1]);
        let s2 = s * s;
        let off = -2.0 * d / (s2 * s);
        DMatrix::from_row_slice(2, 2, &[-1.0 / s2, off, off, 1.0 / s2 - 3.0 * d * d / (s2 * s2)])
    }

    fn sample_into(&self, theta: &[f64], rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let z: f64 = StandardNormal.sample(rng);
        out.push(theta[0] + theta[1] * z);
    }

    fn weighted_mle(&self, data: &[f64], weights: &[f64], theta: &mut [f64], free: &[bool]) {
        if free[0] {
            if let Some(m) = weighted_mean(data, weights) {
                theta[0] = m;
            }
        }
        if free[1] {
            let mu = theta[0];
            let (mut num, mut den) = (0.0, 0.0);
            for (&x, &w) in data.iter().zip(weights) {
                num += w * (x - mu) * (x - mu);
                den += w;
            }
            if den > 0.0 {
                theta[1] = (num / den).sqrt().max(MIN_SCALE);
            }
        }
    }

    fn initial_estimate(&self, data: &[f64]) -> Result<Vec<f64>> {
        require_points(data, 2)?;
        let m = median(data);
        let mut s = mad(data, m) * MAD_TO_SD;
        if s <= 0.0 {
            s = std_dev(data);
        }
        if s <= 0.0 {
            return Err(LqError::ScaleCollapse);
        }
        Ok(vec![m, s])
    }

    fn location_axis(&self, coord: usize) -> Option<usize> {
        (coord == 0).then_some(0)
    }

    fn axis_scale(&self, theta: &[f64], _axis: usize) -> f64 {
        theta[1].abs()
    }

    fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != 2 || !theta.iter().all(|v| v.is_finite()) {
            return Err(LqError::InvalidParameter(format!("bad (mu, sigma): {theta:?}")));
        }
        if theta[1] <= 0.0 {
            return Err(LqError::InvalidParameter(format!("sigma must be positive, got {}", theta[1])));
        }
        Ok(())
    }

    fn mle(&self, data: &[f64]) -> Result<Vec<f64>> {
        require_points(data, 2)?;
        let m = mean(data);
        let var = data.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / data.len() as f64;
        if var <= 0.0 {
            return Err(LqError::ScaleCollapse);
        }
        Ok(vec![m, var.sqrt()])
    }
}

/// `N_r(μ, Σ)` with `Σ` known; `θ = μ ∈ R^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultivariateNormalKnownCovariance {
    cov: DMatrix<f64>,
    precision: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
    log_norm: f64,
}

impl MultivariateNormalKnownCovariance {
    pub fn new(cov: DMatrix<f64>) -> Result<Self> {
        let r = cov.nrows();
        if r == 0 || cov.ncols() != r {
            return Err(LqError::InvalidParameter("covariance must be square and non-empty".into()));
        }
        if (&cov - cov.transpose()).abs().max() > 1e-12 * cov.abs().max().max(1.0) {
            return Err(LqError::InvalidParameter("covariance must be symmetric".into()));
        }
        let chol = Cholesky::new(cov.clone())
            .ok_or_else(|| LqError::Singular("covariance is not positive definite".into()))?;
        let chol_lower = chol.l();
        let log_det: f64 = 2.0 * chol_lower.diagonal().iter().map(|d| d.ln()).sum::<f64>();
        let precision = chol.inverse();
        let log_norm = -0.5 * (r as f64 * (2.0 * PI).ln() + log_det);
        Ok(Self { cov, precision, chol_lower, log_norm })
    }

    pub fn identity(r: usize) -> Self {
        Self::new(DMatrix::identity(r, r)).expect("identity is positive definite")
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    fn dim(&self) -> usize {
        self.cov.nrows()
    }
}

impl Serialize for MultivariateNormalKnownCovariance {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self.cov.row_iter().map(|r| r.iter().copied().collect()).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultivariateNormalKnownCovariance {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows: Vec<Vec<f64>> = Vec::deserialize(d)?;
        let r = rows.len();
        if rows.iter().any(|row| row.len() != r) {
            return Err(serde::de::Error::custom("covariance must be square"));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::new(DMatrix::from_row_slice(r, r, &flat)).map_err(serde::de::Error::custom)
    }
}

impl ParametricFamily for MultivariateNormalKnownCovariance {
    fn dim_theta(&self) -> usize {
        self.dim()
    }
    fn dim_x(&self) -> usize {
        self.dim()
    }
    fn support(&self) -> Support {
        Support::RealVector(self.dim())
    }

    fn log_density(&self, x: &[f64], theta: &[f64]) -> f64 {
        let r = self.dim();
        let mut quad = 0.0;
        for i in 0..r {
            let di = x[i] - theta[i];
            for j in 0..r {
                quad += di * self.precision[(i, j)] * (x[j] - theta[j]);
            }
        }
        self.log_norm - 0.5 * quad
    }

    fn score(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        let d = DVector::from_iterator(self.dim(), x.iter().zip(theta).map(|(a, b)| a - b));
        &self.precision * d
    }

    fn log_density_hess(&self, _x: &[f64], _theta: &[f64]) -> DMatrix<f64> {
        -self.precision.clone()
    }

    fn sample_into(&self, theta: &[f64], rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        let r = self.dim();
        let z: Vec<f64> = (0..r).map(|_| StandardNormal.sample(rng)).collect();
        for i in 0..r {
            let mut v = theta[i];
            for (j, zj) in z.iter().enumerate().take(i + 1) {
                v += self.chol_lower[(i, j)] * zj;
            }
            out.push(v);
        }
    }

    fn weighted_mle(&self, data: &[f64], weights: &[f64], theta: &mut [f64], free: &[bool]) {
        let r = self.dim();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return;
        }
        let mut xbar = vec![0.0; r];
        for (x, &w) in data.chunks_exact(r).zip(weights) {
            for (m, v) in xbar.iter_mut().zip(x) {
                *m += w * v;
            }
        }
        xbar.iter_mut().for_each(|m| *m /= total);

        let free_idx: Vec<usize> = (0..r).filter(|&i| free[i]).collect();
        let fixed_idx: Vec<usize> = (0..r).filter(|&i| !free[i]).collect();
        if free_idx.is_empty() {
            return;
        }
        if fixed_idx.is_empty() {
            theta.copy_from_slice(&xbar);
            return;
        }
        // μ_f = x̄_f - P_ff⁻¹ P_fa (μ_a - x̄_a)
        let p_ff = self.precision.select_rows(&free_idx).select_columns(&free_idx);
        let p_fa = self.precision.select_rows(&free_idx).select_columns(&fixed_idx);
        let gap = DVector::from_iterator(fixed_idx.len(), fixed_idx.iter().map(|&i| theta[i] - xbar[i]));
        let rhs = p_fa * gap;
        let adj = p_ff
            .cholesky()
            .map(|c| c.solve(&rhs))
            .unwrap_or_else(|| DVector::zeros(free_idx.len()));
        for (k, &i) in free_idx.iter().enumerate() {
            theta[i] = xbar[i] - adj[k];
        }
    }

    fn initial_estimate(&self, data: &[f64]) -> Result<Vec<f64>> {
        let r = self.dim();
        require_points(data, r)?;
        Ok((0..r)
            .map(|j| {
                let axis: Vec<f64> = data.iter().skip(j).step_by(r).copied().collect();
                median(&axis)
            })
            .collect())
    }

    fn location_axis(&self, coord: usize) -> Option<usize> {
        (coord < self.dim()).then_some(coord)
    }

    fn axis_scale(&self, _theta: &[f64], axis: usize) -> f64 {
        self.cov[(axis, axis)].sqrt()
    }

    fn mle(&self, data: &[f64]) -> Result<Vec<f64>> {
        let r = self.dim();
        require_points(data, r)?;
        let n = (data.len() / r) as f64;
        Ok((0..r)
            .map(|j| data.iter().skip(j).step_by(r).sum::<f64>() / n)
            .collect())
    }
}

/// Closed set of families, dispatched without boxing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Family {
    NormalKnownVariance { sigma: f64 },
    NormalLocationScale,
    MultivariateNormalKnownCovariance { covariance: MultivariateNormalKnownCovariance },
}

impl Family {
    pub fn normal_known_variance(sigma: f64) -> Result<Self> {
        NormalKnownVariance::new(sigma)?;
        Ok(Family::NormalKnownVariance { sigma })
    }

    pub fn mvn_known_covariance(cov: DMatrix<f64>) -> Result<Self> {
        Ok(Family::MultivariateNormalKnownCovariance {
            covariance: MultivariateNormalKnownCovariance::new(cov)?,
        })
    }
}

macro_rules! dispatch {
    ($self:ident, $f:ident => $body:expr) => {
        match $self {
            Family::NormalKnownVariance { sigma } => {
                let $f = NormalKnownVariance { sigma: *sigma };
                $body
            }
            Family::NormalLocationScale => {
                let $f = NormalLocationScale;
                $body
            }
            Family::MultivariateNormalKnownCovariance { covariance } => {
                let $f = covariance;
                $body
            }
        }
    };
}

impl ParametricFamily for Family {
    fn dim_theta(&self) -> usize {
        dispatch!(self, f => f.dim_theta())
    }
    fn dim_x(&self) -> usize {
        dispatch!(self, f => f.dim_x())
    }
    fn support(&self) -> Support {
        dispatch!(self, f => f.support())
    }
    #[inline]
    fn log_density(&self, x: &[f64], theta: &[f64]) -> f64 {
        dispatch!(self, f => f.log_density(x, theta))
    }
    fn score(&self, x: &[f64], theta: &[f64]) -> DVector<f64> {
        dispatch!(self, f => f.score(x, theta))
    }
    fn log_density_hess(&self, x: &[f64], theta: &[f64]) -> DMatrix<f64> {
        dispatch!(self, f => f.log_density_hess(x, theta))
    }
    fn sample_into(&self, theta: &[f64], rng: &mut dyn RngCore, out: &mut Vec<f64>) {
        dispatch!(self, f => f.sample_into(theta, rng, out))
    }
    fn weighted_mle(&self, data: &[f64], weights: &[f64], theta: &mut [f64], free: &[bool]) {
        dispatch!(self, f => f.weighted_mle(data, weights, theta, free))
    }
    fn initial_estimate(&self, data: &[f64]) -> Result<Vec<f64>> {
        dispatch!(self, f => f.initial_estimate(data))
    }
    fn location_axis(&self, coord: usize) -> Option<usize> {
        dispatch!(self, f => f.location_axis(coord))
    }
    fn validate_theta(&self, theta: &[f64]) -> Result<()> {
        dispatch!(self, f => f.validate_theta(theta))
    }
    fn axis_scale(&self, theta: &[f64], axis: usize) -> f64 {
        dispatch!(self, f => f.axis_scale(theta, axis))
    }
    fn mle(&self, data: &[f64]) -> Result<Vec<f64>> {
        dispatch!(self, f => f.mle(data))
    }
}

fn require_points(data: &[f64], min: usize) -> Result<()> {
    if data.len() < min {
        return Err(LqError::InsufficientData(format!(
            "need at least {min} values, got {}",
            data.len()
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(LqError::Domain("observations must be finite".into()));
    }
    Ok(())
}

pub(crate) fn weighted_mean(data: &[f64], weights: &[f64]) -> Option<f64> {
    let (mut num, mut den) = (0.0, 0.0);
    for (&x, &w) in data.iter().zip(weights) {
        num += w * x;
        den += w;
    }
    (den > 0.0).then(|| num / den)
}

pub fn mean(data: &[f64]) -> f64 {
    data.iter().sum::<f64>() / data.len() as f64
}

/// Sample standard deviation with divisor `n - 1`.
pub fn std_dev(data: &[f64]) -> f64 {
    if data.len() < 2 {
        return 0.0;
    }
    let m = mean(data);
    (data.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (data.len() - 1) as f64).sqrt()
}

pub fn median(data: &[f64]) -> f64 {
    let mut v = data.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Median absolute deviation about `center` (unscaled).
pub fn mad(data: &[f64], center: f64) -> f64 {
    let dev: Vec<f64> = data.iter().map(|x| (x - center).abs()).collect();
    median(&dev)
}
