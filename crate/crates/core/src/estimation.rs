//! Maximum Lq-likelihood estimation by iterative reweighting.
//!
//! Each step fixes weights `w_i = f(x_i; θ_t)^{1-q}` and replaces `θ_t` by
//! the weighted MLE. Because `u ↦ u^{1-q}` is the exponential of a linear
//! function of `log u`, convexity gives
//!
//! ```text
//! Σ L_q(f(x_i; θ)) ≥ Σ L_q(f(x_i; θ_t)) + Σ w_i [log f(x_i; θ) - log f(x_i; θ_t)]
//! ```
//!
//! with equality at `θ_t`, so every step is a minorise–maximise step and the
//! recorded Lq-likelihood trace never decreases.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{LqError, Result};
use crate::family::{mad, median, ParametricFamily, MAD_TO_SD, MIN_SCALE};
use crate::lq::{lq_of_log, LqParam};
use crate::score::score_sum;

/// Multi-start policy for the unconstrained location coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiStart {
    /// On for `q < 0.7`.
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlqeOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub multi_start: MultiStart,
}

impl Default for MlqeOptions {
    fn default() -> Self {
        Self { max_iter: 500, tol: 1e-8, multi_start: MultiStart::Auto }
    }
}

/// `S_n = Σ ψ_q(x_i; θ)` at the returned estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreSum {
    pub s_n: DVector<f64>,
    pub n: usize,
}

impl ScoreSum {
    pub fn max_abs(&self) -> f64 {
        self.s_n.amax()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimationResult {
    pub theta_hat: Vec<f64>,
    /// `f(x_i; θ̂)^{1-q}`.
    pub weights: Vec<f64>,
    /// `Σ L_q(f(x_i; θ̂))`.
    pub lq_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `true` for coordinates held fixed.
    pub constraint_mask: Vec<bool>,
    /// Lq-likelihood before each step, then at the returned estimate.
    pub trace: Vec<f64>,
    pub score_sum: ScoreSum,
}

/// Unconstrained MLqE with default options.
pub fn mlqe<F: ParametricFamily + ?Sized>(
    data: &[f64],
    fam: &F,
    q: LqParam,
    init: Option<&[f64]>,
) -> Result<EstimationResult> {
    mlqe_with(data, fam, q, &[], init, &MlqeOptions::default())
}

/// MLqE with the listed `(coordinate, value)` pairs held fixed.
pub fn mlqe_constrained<F: ParametricFamily + ?Sized>(
    data: &[f64],
    fam: &F,
    q: LqParam,
    fixed: &[(usize, f64)],
    init: Option<&[f64]>,
) -> Result<EstimationResult> {
    mlqe_with(data, fam, q, fixed, init, &MlqeOptions::default())
}

pub fn mlqe_with<F: ParametricFamily + ?Sized>(
    data: &[f64],
    fam: &F,
    q: LqParam,
    fixed: &[(usize, f64)],
    init: Option<&[f64]>,
    opts: &MlqeOptions,
) -> Result<EstimationResult> {
    let p = fam.dim_theta();
    let d = fam.dim_x();
    if data.len() % d != 0 {
        return Err(LqError::InvalidParameter(format!(
            "sample length {} is not a multiple of the observation dimension {d}",
            data.len()
        )));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(LqError::Domain("observations must be finite".into()));
    }
    let n = data.len() / d;

    let mut mask = vec![false; p];
    for &(k, _) in fixed {
        if k >= p {
            return Err(LqError::InvalidParameter(format!("constraint on coordinate {k} but p = {p}")));
        }
        mask[k] = true;
    }
    let free: Vec<bool> = mask.iter().map(|m| !m).collect();

    let mut start = match init {
        Some(t) => t.to_vec(),
        None if mask.iter().all(|&m| m) => vec![0.0; p],
        None => fam.initial_estimate(data)?,
    };
    if start.len() != p {
        return Err(LqError::InvalidParameter(format!("init has {} entries, expected {p}", start.len())));
    }
    for &(k, v) in fixed {
        start[k] = v;
    }
    fam.validate_theta(&start)?;

    if mask.iter().all(|&m| m) {
        return Ok(finish(data, fam, q, start, 0, true, mask, Vec::new()));
    }
    if n < p + 1 {
        return Err(LqError::InsufficientData(format!("need n ≥ p + 1 = {}, got {n}", p + 1)));
    }

    let use_multi = match opts.multi_start {
        MultiStart::On => true,
        MultiStart::Off => false,
        MultiStart::Auto => q.value() < 0.7,
    };
    let mut starts = vec![start.clone()];
    if use_multi {
        let mut up = start.clone();
        let mut dn = start.clone();
        let mut any = false;
        for k in (0..p).filter(|&k| free[k]) {
            if let Some(axis) = fam.location_axis(k) {
                let col: Vec<f64> = data.iter().skip(axis).step_by(d).copied().collect();
                let spread = mad(&col, median(&col)) * MAD_TO_SD;
                if spread > 0.0 {
                    up[k] += 2.0 * spread;
                    dn[k] -= 2.0 * spread;
                    any = true;
                }
            }
        }
        if any {
            starts.push(up);
            starts.push(dn);
        }
    }

    let mut best: Option<EstimationResult> = None;
    let mut first_err = None;
    for s in starts {
        match iterate(data, fam, q, s, &free, mask.clone(), opts) {
            Ok(r) => {
                // strict improvement required to leave the primary start
                let better = best
                    .as_ref()
                    .is_none_or(|b| r.lq_likelihood > b.lq_likelihood + 1e-9 * (1.0 + b.lq_likelihood.abs()));
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}

fn iterate<F: ParametricFamily + ?Sized>(
    data: &[f64],
    fam: &F,
    q: LqParam,
    mut theta: Vec<f64>,
    free: &[bool],
    mask: Vec<bool>,
    opts: &MlqeOptions,
) -> Result<EstimationResult> {
    let d = fam.dim_x();
    let n = data.len() / d;
    let a = q.one_minus();
    let mut logf = vec![0.0; n];
    let mut w = vec![1.0; n];
    let mut next = theta.clone();
    let mut trace = Vec::new();
    let mut last_step = f64::INFINITY;

    for it in 0..opts.max_iter {
        let mut lmax = f64::NEG_INFINITY;
        let mut ell = 0.0;
        for (lf, x) in logf.iter_mut().zip(data.chunks_exact(d)) {
            *lf = fam.log_density(x, &theta);
            ell += lq_of_log(*lf, q);
            lmax = lmax.max(*lf);
        }
        trace.push(ell);
        if a != 0.0 {
            // relative weights; the weighted MLE is invariant to a common factor
            for (wi, &lf) in w.iter_mut().zip(&logf) {
                *wi = (a * (lf - lmax)).exp();
            }
        }
        next.copy_from_slice(&theta);
        fam.weighted_mle(data, &w, &mut next, free);
        last_step = theta
            .iter()
            .zip(&next)
            .map(|(t, u)| (t - u).abs())
            .fold(0.0, f64::max);
        std::mem::swap(&mut theta, &mut next);
        if last_step <= opts.tol {
            check_scale(fam, &theta)?;
            return Ok(finish(data, fam, q, theta, it + 1, true, mask, trace));
        }
        if !last_step.is_finite() {
            break;
        }
    }
    Err(LqError::NoConvergence { iterations: opts.max_iter, last_step, trace })
}

fn check_scale<F: ParametricFamily + ?Sized>(fam: &F, theta: &[f64]) -> Result<()> {
    // a free scale pinned at its floor means the weighted spread vanished
    let collapsed = (0..theta.len()).any(|k| fam.location_axis(k).is_none() && theta[k] <= MIN_SCALE);
    if collapsed {
        Err(LqError::ScaleCollapse)
    } else {
        Ok(())
    }
}

#[allow(clippy::too_many_arguments)]
fn finish<F: ParametricFamily + ?Sized>(
    data: &[f64],
    fam: &F,
    q: LqParam,
    theta: Vec<f64>,
    iterations: usize,
    converged: bool,
    mask: Vec<bool>,
    mut trace: Vec<f64>,
) -> EstimationResult {
    let d = fam.dim_x();
    let mut ell = 0.0;
    let weights: Vec<f64> = data
        .chunks_exact(d)
        .map(|x| {
            let lf = fam.log_density(x, &theta);
            ell += lq_of_log(lf, q);
            crate::lq::power_weight(lf, q)
        })
        .collect();
    trace.push(ell);
    let score_sum = ScoreSum { s_n: score_sum(fam, data, &theta, q), n: data.len() / d };
    EstimationResult {
        theta_hat: theta,
        weights,
        lq_likelihood: ell,
        iterations,
        converged,
        constraint_mask: mask,
        trace,
        score_sum,
    }
}
