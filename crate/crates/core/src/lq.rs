//! The Lq transform `L_q(u) = (u^{1-q} - 1) / (1 - q)` and its tuning
//! parameter.
//!
//! `L_q` interpolates between the identity-like power transform and the
//! logarithm: as `q -> 1` it converges to `log u`. For `q < 1` it is bounded
//! below by `-1 / (1 - q)`, which is what bounds the influence of a single
//! low-density observation on an Lq-likelihood.
//!
//! Most callers hold a log-density rather than a density. [`lq_of_log`]
//! works directly on `log u`, which keeps densities that underflow to zero
//! finite (the floor policy: such points contribute exactly the lower bound
//! for `q < 1`, and [`LOG_FLOOR`] for `q = 1`).

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{LqError, Result};

/// Surrogate for `log 0` when `q = 1`.
pub const LOG_FLOOR: f64 = -1e300;

/// `|1 - q|` below this is treated as `q = 1` in series expansions.
const NEAR_ONE: f64 = 1e-12;

/// Tuning parameter `q` in `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LqParam(f64);

impl LqParam {
    /// The log-likelihood case.
    pub const ONE: LqParam = LqParam(1.0);

    pub fn new(q: f64) -> Result<Self> {
        if q.is_finite() && q > 0.0 && q <= 1.0 {
            Ok(LqParam(q))
        } else {
            Err(LqError::InvalidParameter(format!(
                "q must lie in (0, 1], got {q}"
            )))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `1 - q`, the exponent applied to densities.
    #[inline]
    pub fn one_minus(self) -> f64 {
        1.0 - self.0
    }

    #[inline]
    pub fn is_one(self) -> bool {
        self.one_minus() == 0.0
    }

    /// `inf_{u > 0} L_q(u)`; `-inf` at `q = 1`.
    pub fn lower_bound(self) -> f64 {
        if self.is_one() {
            f64::NEG_INFINITY
        } else {
            -1.0 / self.one_minus()
        }
    }
}

impl TryFrom<f64> for LqParam {
    type Error = LqError;
    fn try_from(q: f64) -> Result<Self> {
        LqParam::new(q)
    }
}

impl From<LqParam> for f64 {
    fn from(q: LqParam) -> f64 {
        q.0
    }
}

impl fmt::Display for LqParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// `L_q(u)` for `u > 0`.
pub fn lq_transform(u: f64, q: LqParam) -> Result<f64> {
    if !(u > 0.0) || !u.is_finite() {
        return Err(LqError::Domain(format!(
            "L_q is defined for finite u > 0, got {u}"
        )));
    }
    Ok(lq_of_log(u.ln(), q))
}

/// `L_q(exp(log_u))`, total over `log_u in [-inf, +inf)`.
///
/// Uses `expm1` so the `q -> 1` limit is reached without cancellation.
#[inline]
pub fn lq_of_log(log_u: f64, q: LqParam) -> f64 {
    let a = q.one_minus();
    if log_u == f64::NEG_INFINITY {
        return q.lower_bound().max(LOG_FLOOR);
    }
    if a.abs() < NEAR_ONE {
        return log_u.max(LOG_FLOOR);
    }
    (a * log_u).exp_m1() / a
}

/// `u^{1-q}` computed from `log u`; zero for an underflowed density.
#[inline]
pub fn power_weight(log_u: f64, q: LqParam) -> f64 {
    if q.is_one() {
        1.0
    } else {
        (q.one_minus() * log_u).exp()
    }
}
