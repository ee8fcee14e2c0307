//! Hypothesis tests: the Lq-likelihood ratio test and its competitors.

mod bootstrap;
mod classical;
mod huber;
mod lqlr;
mod select_q;

pub use bootstrap::{
    bootstrap_critical_value, empirical_quantile, exceedance_p_value, resample_statistics, BootstrapOutcome,
};
pub use classical::{sign_test, t_test, wilcoxon_exact_upper_tail, wilcoxon_signed_rank, WILCOXON_EXACT_MAX_N};
pub use huber::{censored_log_ratio, huber_censored_lr, HuberOptions};
pub use lqlr::{lqlr_fit, lqlr_statistic, lqlr_test, LqlrFit, LqlrOptions, QChoice};
pub use select_q::{default_q_grid, select_q, QSelection, Q_FLOOR};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{LqError, Result};
use crate::estimation::{MlqeOptions, MultiStart};
use crate::family::{Family, ParametricFamily};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_BOOTSTRAP: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Alternative {
    Greater,
    Less,
    TwoSided,
}

impl FromStr for Alternative {
    type Err = LqError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greater" => Ok(Alternative::Greater),
            "less" => Ok(Alternative::Less),
            "two-sided" | "two_sided" => Ok(Alternative::TwoSided),
            other => Err(LqError::InvalidParameter(format!("unknown alternative '{other}'"))),
        }
    }
}

impl fmt::Display for Alternative {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Alternative::Greater => "greater",
            Alternative::Less => "less",
            Alternative::TwoSided => "two-sided",
        })
    }
}

/// `H0: θ_{1..r} = null_values` against the stated alternative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    pub family: Family,
    /// Null values for the tested block, i.e. the first `r` coordinates.
    pub null_values: Vec<f64>,
    pub alternative: Alternative,
    pub alpha: f64,
}

impl HypothesisSpec {
    pub fn new(family: Family, null_values: Vec<f64>, alternative: Alternative, alpha: f64) -> Result<Self> {
        let r = null_values.len();
        if r == 0 || r > family.dim_theta() {
            return Err(LqError::InvalidParameter(format!(
                "tested block size must be in 1..={}, got {r}",
                family.dim_theta()
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(LqError::InvalidParameter(format!("alpha must be in (0, 1), got {alpha}")));
        }
        if alternative != Alternative::TwoSided && r != 1 {
            return Err(LqError::Unsupported("one-sided alternatives need a single tested coordinate".into()));
        }
        Ok(Self { family, null_values, alternative, alpha })
    }

    /// One-sample location test on the first coordinate.
    pub fn location(family: Family, mu0: f64, alternative: Alternative, alpha: f64) -> Result<Self> {
        Self::new(family, vec![mu0], alternative, alpha)
    }

    pub fn r(&self) -> usize {
        self.null_values.len()
    }

    pub fn constraints(&self) -> Vec<(usize, f64)> {
        self.null_values.iter().copied().enumerate().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Lqlr,
    LrT,
    Wilcoxon,
    Sign,
    Huber,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Lqlr => "lqlr",
            Method::LrT => "lr_t",
            Method::Wilcoxon => "wilcoxon",
            Method::Sign => "sign",
            Method::Huber => "huber",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BootstrapMeta {
    pub b: usize,
    pub seed: u64,
    /// Estimate used to centre the resampled null.
    pub theta_hat: Vec<f64>,
    pub redraws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    /// Oriented so that large values favour the alternative, except for
    /// the rank tests, which report `W+` and the positive-sign count.
    pub statistic: f64,
    /// On the statistic's scale; absent for the exact rank tests.
    pub critical_value: Option<f64>,
    pub p_value: f64,
    pub reject: bool,
    pub q_used: f64,
    pub method: Method,
    pub n: usize,
    pub bootstrap: Option<BootstrapMeta>,
}

/// Solver settings shared by every fit inside the tests: a single start
/// from the robust initial estimate, so the unconstrained and the null fit
/// are searched the same way.
pub(crate) fn fit_options() -> MlqeOptions {
    MlqeOptions { multi_start: MultiStart::Off, ..MlqeOptions::default() }
}

pub(crate) fn check_sample(data: &[f64], min: usize) -> Result<()> {
    if data.len() < min {
        return Err(LqError::InsufficientData(format!("need at least {min} observations, got {}", data.len())));
    }
    if data.iter().any(|v| !v.is_finite()) {
        return Err(LqError::Domain("observations must be finite".into()));
    }
    Ok(())
}

/// One-sided and two-sided tail probabilities combined per alternative.
pub(crate) fn combine_tails(upper: f64, lower: f64, alt: Alternative) -> f64 {
    let p = match alt {
        Alternative::Greater => upper,
        Alternative::Less => lower,
        Alternative::TwoSided => 2.0 * upper.min(lower),
    };
    p.clamp(0.0, 1.0)
}
