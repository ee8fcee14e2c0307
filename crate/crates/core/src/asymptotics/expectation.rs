//! Expectations under a gross-error model: adaptive quadrature for scalar
//! observations, seeded Monte Carlo otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::error::{LqError, Result};
use crate::family::ParametricFamily;
use crate::mixture::GrossErrorModel;
use crate::seed;

pub const DEFAULT_TOLERANCE: f64 = 1e-8;
pub const DEFAULT_DRAWS: usize = 1_000_000;
pub const DEFAULT_MC_SEED: u64 = 20_240_601;
/// Batches used for the batch-means standard error.
pub const MC_BATCHES: usize = 20;
/// Half-width of the integration range in units of the largest component
/// standard deviation.
const RANGE_SDS: f64 = 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum ExpectationMethod {
    Quadrature { tol: f64 },
    MonteCarlo { draws: usize, seed: u64 },
}

impl ExpectationMethod {
    /// Quadrature for scalar observations, Monte Carlo otherwise.
    pub fn default_for(dim_x: usize) -> Self {
        if dim_x == 1 {
            ExpectationMethod::Quadrature { tol: DEFAULT_TOLERANCE }
        } else {
            ExpectationMethod::MonteCarlo { draws: DEFAULT_DRAWS, seed: DEFAULT_MC_SEED }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpectationMeta {
    pub method: ExpectationMethod,
    /// Integrand evaluations (quadrature) or draws (Monte Carlo).
    pub evaluations: usize,
    /// Quadrature error estimate, or the largest batch-means standard error.
    pub abs_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub values: Vec<f64>,
    /// Per-batch means, Monte Carlo only.
    pub batches: Option<Vec<Vec<f64>>>,
    pub meta: ExpectationMeta,
}

/// Break points for the quadrature: component centres and a ladder of
/// multiples of each component's scale around them.
fn quadrature_layout(model: &GrossErrorModel) -> (f64, f64, Vec<f64>) {
    let fam = &model.family;
    let centre_f = (0..fam.dim_theta())
        .find(|&k| fam.location_axis(k) == Some(0))
        .map_or(0.0, |k| model.theta[k]);
    let mut comps = vec![(centre_f, fam.axis_scale(&model.theta, 0))];
    if model.epsilon > 0.0 {
        comps.push((model.contamination.mean[0], model.contamination.axis_sd(0)));
    }
    let sd_max = comps.iter().map(|c| c.1).fold(0.0, f64::max);
    let lo = comps.iter().map(|c| c.0).fold(f64::INFINITY, f64::min) - RANGE_SDS * sd_max;
    let hi = comps.iter().map(|c| c.0).fold(f64::NEG_INFINITY, f64::max) + RANGE_SDS * sd_max;
    let mut breaks = Vec::new();
    for &(c, s) in &comps {
        for k in [-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
            breaks.push(c + k * s);
        }
    }
    (lo, hi, breaks)
}

/// `E_h[φ(X)]` for an `m`-vector valued `φ`.
pub fn expect<G>(model: &GrossErrorModel, m: usize, method: ExpectationMethod, phi: G) -> Result<Expectation>
where
    G: Fn(&[f64], &mut [f64]) + Sync,
{
    match method {
        ExpectationMethod::Quadrature { tol } => {
            if model.dim_x() != 1 {
                return Err(LqError::Unsupported("quadrature needs scalar observations".into()));
            }
            let (lo, hi, breaks) = quadrature_layout(model);
            let integral = integrate(
                |x, out: &mut [f64]| {
                    let h = model.density(&[x]);
                    if h == 0.0 {
                        out.fill(0.0);
                        return;
                    }
                    phi(&[x], out);
                    for o in out.iter_mut() {
                        *o *= h;
                    }
                },
                m,
                lo,
                hi,
                &breaks,
                tol,
            );
            Ok(Expectation {
                values: integral.values,
                batches: None,
                meta: ExpectationMeta { method, evaluations: integral.evaluations, abs_error: integral.abs_error },
            })
        }
        ExpectationMethod::MonteCarlo { draws, seed: base } => {
            if draws < MC_BATCHES * 10 {
                return Err(LqError::InvalidParameter(format!("need at least {} draws", MC_BATCHES * 10)));
            }
            let per = draws / MC_BATCHES;
            let batches: Vec<Vec<f64>> = (0..MC_BATCHES)
                .into_par_iter()
                .map(|b| {
                    let mut rng = seed::rng_for(base, &[b as u64]);
                    let xs = model.sample_with(per, &mut rng);
                    let mut acc = vec![0.0; m];
                    let mut tmp = vec![0.0; m];
                    for x in xs.chunks_exact(model.dim_x()) {
                        phi(x, &mut tmp);
                        for k in 0..m {
                            acc[k] += tmp[k];
                        }
                    }
                    acc.iter().map(|v| v / per as f64).collect()
                })
                .collect();
            let nb = MC_BATCHES as f64;
            let mut values = vec![0.0; m];
            for b in &batches {
                for k in 0..m {
                    values[k] += b[k] / nb;
                }
            }
            let se = (0..m)
                .map(|k| {
                    let var = batches.iter().map(|b| (b[k] - values[k]).powi(2)).sum::<f64>() / (nb - 1.0);
                    (var / nb).sqrt()
                })
                .fold(0.0, f64::max);
            Ok(Expectation {
                values,
                batches: Some(batches),
                meta: ExpectationMeta { method, evaluations: per * MC_BATCHES, abs_error: se },
            })
        }
    }
}
