//! Influence function of the MLqE and level influence function of the
//! LqLR test under the clean model.

use nalgebra::DVector;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use super::expectation::ExpectationMethod;
use super::sandwich::{sandwich, SandwichMatrices};
use crate::error::{LqError, Result};
use crate::family::{Family, ParametricFamily};
use crate::lq::LqParam;
use crate::mixture::{Gaussian, GrossErrorModel};
use crate::score::psi_q;

fn clean_sandwich(fam: &Family, theta: &[f64], q: LqParam) -> Result<SandwichMatrices> {
    let d = fam.dim_x();
    let unused = Gaussian::new(vec![0.0; d], nalgebra::DMatrix::identity(d, d))?;
    let model = GrossErrorModel::new(fam.clone(), theta.to_vec(), unused, 0.0)?;
    sandwich(&model, fam, theta, q, fam.dim_theta(), ExpectationMethod::default_for(d))
}

/// `IF(x) = B⁻¹ ψ_q(x; θ)` with `B` under `f(·; θ)`, one vector per point of
/// the flat `x_grid`.
pub fn influence_function(fam: &Family, theta: &[f64], q: LqParam, x_grid: &[f64]) -> Result<Vec<DVector<f64>>> {
    let s = clean_sandwich(fam, theta, q)?;
    let b_inv = s.b.try_inverse().ok_or_else(|| LqError::Singular("B is not invertible".into()))?;
    Ok(x_grid.chunks_exact(fam.dim_x()).map(|x| &b_inv * psi_q(fam, x, theta, q)).collect())
}

/// `LIF(x) = φ(Φ⁻¹(1-α0)) IF_1(x) / √(∫ IF_1² dF)` for the first coordinate.
pub fn level_influence(fam: &Family, theta: &[f64], q: LqParam, alpha0: f64, x_grid: &[f64]) -> Result<Vec<f64>> {
    if !(alpha0 > 0.0 && alpha0 < 1.0) {
        return Err(LqError::InvalidParameter(format!("alpha must be in (0, 1), got {alpha0}")));
    }
    let s = clean_sandwich(fam, theta, q)?;
    let norm = s.variance_first().sqrt();
    let std = Normal::standard();
    let k = std.pdf(std.inverse_cdf(1.0 - alpha0));
    let b_inv = s.b.try_inverse().ok_or_else(|| LqError::Singular("B is not invertible".into()))?;
    Ok(x_grid
        .chunks_exact(fam.dim_x())
        .map(|x| k * (&b_inv * psi_q(fam, x, theta, q))[0] / norm)
        .collect())
}
