//! Data-adaptive choice of `q` by minimising the empirical asymptotic
//! variance of the MLqE of the tested coordinate:
//!
//! ```text
//! V̂_q = mean(ψ_q(x_i; θ̂_q)²) / mean(ψ'_q(x_i; θ̂_q))²
//! ```
//!
//! `θ̂_q` is refit at every grid point. With several tested coordinates the
//! per-coordinate ratios are summed.

use serde::{Deserialize, Serialize};

use super::HypothesisSpec;
use crate::error::{LqError, Result};
use crate::estimation::mlqe_with;
use crate::family::ParametricFamily;
use crate::lq::LqParam;
use crate::score::{psi_q, psi_q_prime};

/// Smallest admissible `q` for selection.
pub const Q_FLOOR: f64 = 0.5;

/// `{0.50, 0.55, …, 1.00}`.
pub fn default_q_grid() -> Vec<f64> {
    (0..=10).map(|k| (50 + 5 * k) as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QSelection {
    pub q_hat: f64,
    /// `(q, V̂_q)`; `None` where estimation failed.
    pub curve: Vec<(f64, Option<f64>)>,
}

pub fn select_q(data: &[f64], spec: &HypothesisSpec, grid: &[f64]) -> Result<QSelection> {
    if grid.is_empty() {
        return Err(LqError::InvalidParameter("empty q grid".into()));
    }
    if let Some(bad) = grid.iter().find(|&&q| !(Q_FLOOR..=1.0).contains(&q)) {
        return Err(LqError::InvalidParameter(format!("grid value {bad} outside [{Q_FLOOR}, 1]")));
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    sorted.dedup();

    let fam = &spec.family;
    let d = fam.dim_x();
    let r = spec.r();
    let curve: Vec<(f64, Option<f64>)> = sorted
        .iter()
        .map(|&qv| {
            let q = LqParam::new(qv).expect("grid validated");
            let obj = mlqe_with(data, fam, q, &[], None, &super::fit_options()).ok().and_then(|fit| {
                let n = (data.len() / d) as f64;
                let mut num = vec![0.0; r];
                let mut den = vec![0.0; r];
                for x in data.chunks_exact(d) {
                    let psi = psi_q(fam, x, &fit.theta_hat, q);
                    let jac = psi_q_prime(fam, x, &fit.theta_hat, q);
                    for k in 0..r {
                        num[k] += psi[k] * psi[k];
                        den[k] += jac[(k, k)];
                    }
                }
                let v: f64 = (0..r).map(|k| (num[k] / n) / (den[k] / n).powi(2)).sum();
                v.is_finite().then_some(v)
            });
            (qv, obj)
        })
        .collect();

    // ascending grid + `<=` keeps the larger q on ties
    let mut best: Option<(f64, f64)> = None;
    for &(qv, obj) in &curve {
        if let Some(v) = obj {
            if best.is_none_or(|(_, bv)| v <= bv * (1.0 + 1e-12)) {
                best = Some((qv, v));
            }
        }
    }
    let (q_hat, _) = best.ok_or(LqError::SelectionFailed)?;
    Ok(QSelection { q_hat: q_hat.max(Q_FLOOR), curve })
}
