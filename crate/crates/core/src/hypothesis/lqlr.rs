use serde::{Deserialize, Serialize};

use super::bootstrap::{bootstrap_critical_value_with, empirical_quantile, exceedance_p_value};
use super::select_q::{default_q_grid, select_q};
use super::{check_sample, Alternative, BootstrapMeta, HypothesisSpec, Method, TestResult};
use crate::error::Result;
use crate::estimation::{mlqe_with, EstimationResult, MlqeOptions};
use crate::family::ParametricFamily;
use crate::lq::LqParam;

/// Slack below zero tolerated before `D_q` is clamped.
const NEGATIVE_SLACK: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct LqlrFit {
    /// `D_q = 2 [Σ L_q(f(x_i; θ̂_q)) - Σ L_q(f(x_i; θ̂_{q,0}))]`.
    pub d_q: f64,
    /// `√D_q` signed so that large values favour the alternative; only for
    /// one-sided alternatives.
    pub oriented_root: Option<f64>,
    pub unconstrained: EstimationResult,
    pub constrained: EstimationResult,
}

impl LqlrFit {
    /// The statistic compared against the bootstrap law.
    pub fn oriented(&self) -> f64 {
        self.oriented_root.unwrap_or(self.d_q)
    }
}

pub fn lqlr_statistic(data: &[f64], spec: &HypothesisSpec, q: LqParam) -> Result<f64> {
    Ok(lqlr_fit(data, spec, q)?.d_q)
}

pub fn lqlr_fit(data: &[f64], spec: &HypothesisSpec, q: LqParam) -> Result<LqlrFit> {
    lqlr_fit_with(data, spec, q, &super::fit_options())
}

pub(crate) fn lqlr_fit_with(data: &[f64], spec: &HypothesisSpec, q: LqParam, opts: &MlqeOptions) -> Result<LqlrFit> {
    let fam = &spec.family;
    let mut full = mlqe_with(data, fam, q, &[], None, opts)?;
    let constraints = spec.constraints();
    let null = mlqe_with(data, fam, q, &constraints, None, opts)?;

    if null.lq_likelihood > full.lq_likelihood {
        // the null optimum is feasible for the full problem, so restart there
        let retry = mlqe_with(data, fam, q, &[], Some(&null.theta_hat), opts)?;
        if retry.lq_likelihood > full.lq_likelihood {
            full = retry;
        }
    }

    let raw = 2.0 * (full.lq_likelihood - null.lq_likelihood);
    debug_assert!(raw >= -NEGATIVE_SLACK * (1.0 + full.lq_likelihood.abs()));
    let d_q = raw.max(0.0);

    let oriented_root = match spec.alternative {
        Alternative::TwoSided => None,
        alt => {
            let diff = full.theta_hat[0] - spec.null_values[0];
            let sign = if diff > 0.0 {
                1.0
            } else if diff < 0.0 {
                -1.0
            } else {
                0.0
            };
            let dir = if alt == Alternative::Greater { 1.0 } else { -1.0 };
            Some(dir * sign * d_q.sqrt())
        }
    };
    Ok(LqlrFit { d_q, oriented_root, unconstrained: full, constrained: null })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QChoice {
    Fixed(LqParam),
    Adaptive { grid: Vec<f64> },
}

impl QChoice {
    pub fn adaptive() -> Self {
        QChoice::Adaptive { grid: default_q_grid() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LqlrOptions {
    pub q: QChoice,
    pub bootstrap: usize,
    pub seed: u64,
}

/// Full LqLR decision: optional adaptive `q`, `D_q`, shift-bootstrap null,
/// exceedance p-value. Rejects when `p ≤ α`.
pub fn lqlr_test(data: &[f64], spec: &HypothesisSpec, opts: &LqlrOptions) -> Result<TestResult> {
    check_sample(data, 2 * spec.family.dim_x())?;
    let q = match &opts.q {
        QChoice::Fixed(q) => *q,
        QChoice::Adaptive { grid } => LqParam::new(select_q(data, spec, grid)?.q_hat)?,
    };
    let mlqe_opts = super::fit_options();
    let fit = lqlr_fit_with(data, spec, q, &mlqe_opts)?;
    let boot = bootstrap_critical_value_with(data, spec, q, opts.bootstrap, opts.seed, &mlqe_opts)?;

    let observed = fit.oriented();
    let null_draws = boot.oriented_draws();
    let p_value = exceedance_p_value(null_draws, observed);
    let critical_value = empirical_quantile(null_draws, 1.0 - spec.alpha);

    Ok(TestResult {
        statistic: observed,
        critical_value: Some(critical_value),
        p_value,
        reject: p_value <= spec.alpha,
        q_used: q.value(),
        method: Method::Lqlr,
        n: data.len() / spec.family.dim_x(),
        bootstrap: Some(BootstrapMeta {
            b: opts.bootstrap,
            seed: opts.seed,
            theta_hat: boot.theta_hat,
            redraws: boot.redraws,
        }),
    })
}
