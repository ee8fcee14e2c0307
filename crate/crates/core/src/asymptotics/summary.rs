//! Asymptotic variance, efficacy and limiting power of the LqLR test, plus
//! the `(ε, q)` tables built from the sandwich matrices.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::expectation::ExpectationMethod;
use super::sandwich::{pseudo_true_theta, sandwich, SandwichMatrices};
use crate::error::{LqError, Result};
use crate::family::{Family, ParametricFamily};
use crate::lq::LqParam;
use crate::mixture::{Gaussian, GrossErrorModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticSummary {
    pub q: f64,
    /// Parameter the expectations were taken at: the null value on the
    /// tested coordinate, pseudo-true values on the rest.
    pub theta: Vec<f64>,
    pub v_q: f64,
    pub u_q: f64,
    pub u_q_prime: f64,
    /// `c_q = u'_q / √V_q`.
    pub efficacy: f64,
    pub delta: f64,
    pub alpha: f64,
    /// `Φ(c_q δ - z_{1-α})`.
    pub limiting_power: f64,
    /// `e_{q,1} = V_1 / V_q`.
    pub relative_efficiency: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    /// Skip the symmetry check. `u_q(θ) = θ` is then assumed without
    /// justification.
    pub allow_asymmetric: bool,
}

fn location_centre<F: ParametricFamily + ?Sized>(fam: &F, theta: &[f64]) -> Vec<Option<f64>> {
    (0..fam.dim_x())
        .map(|axis| (0..fam.dim_theta()).find(|&k| fam.location_axis(k) == Some(axis)).map(|k| theta[k]))
        .collect()
}

/// Whether `f(·; θ0)`, the model's clean component and `g` share a centre
/// of symmetry.
pub fn is_symmetric(model: &GrossErrorModel, theta0: &[f64]) -> bool {
    let fam = &model.family;
    let c0 = location_centre(fam, theta0);
    let cm = location_centre(fam, &model.theta);
    c0.iter().zip(&cm).enumerate().all(|(axis, (a, b))| match (a, b) {
        (Some(a), Some(b)) => {
            let tol = 1e-12 * (1.0 + a.abs());
            (a - b).abs() <= tol && (model.epsilon == 0.0 || (model.contamination.mean[axis] - a).abs() <= tol)
        }
        _ => false,
    })
}

/// Expectation point for the tested coordinate(s) held at `theta0`.
fn null_point(model: &GrossErrorModel, theta0: &[f64], r: usize, q: LqParam, method: ExpectationMethod) -> Result<Vec<f64>> {
    let fixed: Vec<(usize, f64)> = (0..r).map(|k| (k, theta0[k])).collect();
    pseudo_true_theta(model, &model.family, q, &fixed, theta0, method)
}

fn variance_at(model: &GrossErrorModel, theta0: &[f64], q: LqParam, method: ExpectationMethod) -> Result<(Vec<f64>, f64)> {
    let theta = null_point(model, theta0, 1, q, method)?;
    let s = sandwich(model, &model.family, &theta, q, 1, method)?;
    Ok((theta, s.variance_first()))
}

/// `V_q`, efficacy and limiting power for testing the first coordinate of
/// `model.family` at `theta0` against local alternatives `θ0 + δ/√n`.
pub fn asymptotic_summary(
    model: &GrossErrorModel,
    theta0: &[f64],
    q: LqParam,
    delta: f64,
    alpha: f64,
    opts: SummaryOptions,
) -> Result<AsymptoticSummary> {
    model.family.validate_theta(theta0)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(LqError::InvalidParameter(format!("alpha must be in (0, 1), got {alpha}")));
    }
    if !opts.allow_asymmetric && !is_symmetric(model, theta0) {
        return Err(LqError::Unsupported(
            "f and g must be symmetric about the null value for u_q(θ) = θ; set allow_asymmetric to override".into(),
        ));
    }
    let method = ExpectationMethod::default_for(model.dim_x());
    let (theta, v_q) = variance_at(model, theta0, q, method)?;
    let v_1 = if q.is_one() { v_q } else { variance_at(model, theta0, LqParam::ONE, method)?.1 };
    let efficacy = 1.0 / v_q.sqrt();
    let z = Normal::standard().inverse_cdf(1.0 - alpha);
    let limiting_power = Normal::standard().cdf(delta * efficacy - z);
    Ok(AsymptoticSummary {
        q: q.value(),
        u_q: theta0[0],
        theta,
        v_q,
        u_q_prime: 1.0,
        efficacy,
        delta,
        alpha,
        limiting_power,
        relative_efficiency: v_1 / v_q,
    })
}

/// `(q, V_q)` over a grid.
pub fn variance_curve(model: &GrossErrorModel, theta0: &[f64], q_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    let method = ExpectationMethod::default_for(model.dim_x());
    q_grid
        .par_iter()
        .map(|&qv| {
            let q = LqParam::new(qv)?;
            Ok((qv, variance_at(model, theta0, q, method)?.1))
        })
        .collect()
}

/// Grid point with the smallest `V_q`; ties go to the larger `q`.
pub fn optimal_q(curve: &[(f64, f64)]) -> Option<f64> {
    curve
        .iter()
        .copied()
        .filter(|c| c.1.is_finite())
        .fold(None, |best: Option<(f64, f64)>, c| match best {
            Some(b) if b.1 < c.1 || (b.1 == c.1 && b.0 > c.0) => Some(b),
            _ => Some(c),
        })
        .map(|b| b.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceRow {
    pub eps: f64,
    pub q: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenRow {
    pub eps: f64,
    pub q: f64,
    pub index: usize,
    pub lambda: f64,
    pub stderr: Option<f64>,
}

fn cell(fam: &Family, theta: &[f64], g: &Gaussian, r: usize, eps: f64, qv: f64, method: ExpectationMethod) -> Result<SandwichMatrices> {
    let model = GrossErrorModel::new(fam.clone(), theta.to_vec(), g.clone(), eps)?;
    let q = LqParam::new(qv)?;
    let point = null_point(&model, theta, r, q, method)?;
    sandwich(&model, fam, &point, q, r, method)
}

fn grid(eps_grid: &[f64], q_grid: &[f64]) -> Vec<(f64, f64)> {
    eps_grid.iter().flat_map(|&e| q_grid.iter().map(move |&q| (e, q))).collect()
}

/// `A(ε, q) / B(ε, q)` for a single tested coordinate, row-major in `ε`.
pub fn ratio_surface(fam: &Family, theta: &[f64], g: &Gaussian, eps_grid: &[f64], q_grid: &[f64]) -> Result<Vec<SurfaceRow>> {
    let method = ExpectationMethod::default_for(fam.dim_x());
    grid(eps_grid, q_grid)
        .into_par_iter()
        .map(|(eps, q)| {
            let s = cell(fam, theta, g, 1, eps, q, method)?;
            Ok(SurfaceRow { eps, q, ratio: s.lambdas[0] })
        })
        .collect()
}

/// Distortion eigenvalues over `(ε, q)` for the first `r` coordinates.
pub fn eigenvalue_curves(
    fam: &Family,
    theta: &[f64],
    g: &Gaussian,
    r: usize,
    eps_grid: &[f64],
    q_grid: &[f64],
    method: ExpectationMethod,
) -> Result<Vec<EigenRow>> {
    let cells: Vec<Vec<EigenRow>> = grid(eps_grid, q_grid)
        .into_iter()
        .map(|(eps, q)| {
            let s = cell(fam, theta, g, r, eps, q, method)?;
            Ok(s.lambdas
                .iter()
                .enumerate()
                .map(|(index, &lambda)| EigenRow {
                    eps,
                    q,
                    index,
                    lambda,
                    stderr: s.lambda_stderr.as_ref().map(|se| se[index]),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(cells.into_iter().flatten().collect())
}
