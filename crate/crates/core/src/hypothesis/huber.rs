//! Huber's censored likelihood ratio, `Σ log clamp(p1(x_i)/p0(x_i), c', c'')`.
//!
//! The composite form used here takes `p1` as the family density at the
//! unconstrained maximum likelihood estimate and `p0` at the null-constrained
//! one, and calibrates by the same shift-bootstrap as the LqLR test, centred
//! with the MLE.

use serde::{Deserialize, Serialize};

use super::bootstrap::{empirical_quantile, exceedance_p_value, resample_statistics, shift_to_null};
use super::{check_sample, Alternative, BootstrapMeta, HypothesisSpec, Method, TestResult};
use crate::error::{LqError, Result};
use crate::estimation::mlqe_constrained;
use crate::family::ParametricFamily;
use crate::lq::LqParam;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuberOptions {
    pub c_low: f64,
    pub c_high: f64,
    pub bootstrap: usize,
    pub seed: u64,
}

impl Default for HuberOptions {
    fn default() -> Self {
        Self { c_low: 0.1, c_high: 10.0, bootstrap: super::DEFAULT_BOOTSTRAP, seed: 0 }
    }
}

/// `Σ log clamp(p1/p0, c_low, c_high)` from per-point log densities.
///
/// `p0 = 0 < p1` clamps to `c_high`; both zero contributes `log 1 = 0`.
pub fn censored_log_ratio<P0, P1>(data: &[f64], dim: usize, log_p0: P0, log_p1: P1, c_low: f64, c_high: f64) -> f64
where
    P0: Fn(&[f64]) -> f64,
    P1: Fn(&[f64]) -> f64,
{
    let (lo, hi) = (c_low.ln(), c_high.ln());
    data.chunks_exact(dim)
        .map(|x| {
            let (a, b) = (log_p0(x), log_p1(x));
            let r = if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY { 0.0 } else { b - a };
            r.clamp(lo, hi)
        })
        .sum()
}

fn composite_statistic(data: &[f64], spec: &HypothesisSpec, c_low: f64, c_high: f64) -> Result<(f64, Vec<f64>)> {
    let fam = &spec.family;
    let full = fam.mle(data)?;
    let null = mlqe_constrained(data, fam, LqParam::ONE, &spec.constraints(), None)?.theta_hat;
    let t = censored_log_ratio(
        data,
        fam.dim_x(),
        |x| fam.log_density(x, &null),
        |x| fam.log_density(x, &full),
        c_low,
        c_high,
    );
    let oriented = match spec.alternative {
        Alternative::TwoSided => t,
        Alternative::Greater => t * (full[0] - spec.null_values[0]).signum(),
        Alternative::Less => -t * (full[0] - spec.null_values[0]).signum(),
    };
    Ok((oriented, full))
}

pub fn huber_censored_lr(data: &[f64], spec: &HypothesisSpec, opts: &HuberOptions) -> Result<TestResult> {
    if !(opts.c_low > 0.0 && opts.c_low < opts.c_high) {
        return Err(LqError::InvalidParameter(format!(
            "need 0 < c_low < c_high, got {} and {}",
            opts.c_low, opts.c_high
        )));
    }
    if opts.bootstrap < 100 {
        return Err(LqError::InvalidParameter("bootstrap size must be at least 100".into()));
    }
    let fam = &spec.family;
    check_sample(data, 2 * fam.dim_x())?;
    let (observed, mle) = composite_statistic(data, spec, opts.c_low, opts.c_high)?;
    let shifted = shift_to_null(data, spec, &mle)?;
    let (draws, redraws) = resample_statistics(&shifted, fam.dim_x(), opts.bootstrap, opts.seed, |x| {
        composite_statistic(x, spec, opts.c_low, opts.c_high).map(|s| s.0)
    })?;
    let p_value = exceedance_p_value(&draws, observed);
    Ok(TestResult {
        statistic: observed,
        critical_value: Some(empirical_quantile(&draws, 1.0 - spec.alpha)),
        p_value,
        reject: p_value <= spec.alpha,
        q_used: 1.0,
        method: Method::Huber,
        n: data.len() / fam.dim_x(),
        bootstrap: Some(BootstrapMeta { b: opts.bootstrap, seed: opts.seed, theta_hat: mle, redraws }),
    })
}
