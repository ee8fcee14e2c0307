//! Shift-bootstrap calibration of `D_q`.
//!
//! 1. fit `θ̂_q` to the data;
//! 2. translate each tested location coordinate by `θ0 - θ̂_q` so the
//!    sample sits on the null;
//! 3. draw `B` resamples with replacement;
//! 4. evaluate `D_q` on each;
//! 5. take the empirical `1 - α` quantile.
//!
//! Replicate `b` is seeded from `derive(seed, [b, attempt])`, so results do
//! not depend on thread count or scheduling.

use rand::Rng;
use rayon::prelude::*;

use super::lqlr::lqlr_fit_with;
use super::HypothesisSpec;
use crate::error::{LqError, Result};
use crate::estimation::{mlqe_with, MlqeOptions};
use crate::family::ParametricFamily;
use crate::lq::LqParam;
use crate::seed;

/// Resamples a single replicate may redraw before the replicate gives up.
const MAX_ATTEMPTS: u64 = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct BootstrapOutcome {
    /// Empirical `1 - α` quantile of the `D_q` draws.
    pub critical_value: f64,
    /// `D_q^b`, in replicate order.
    pub draws: Vec<f64>,
    /// Signed roots for one-sided alternatives (empty for two-sided).
    pub oriented_roots: Vec<f64>,
    /// The `θ̂_q` used to centre the null.
    pub theta_hat: Vec<f64>,
    pub redraws: usize,
}

impl BootstrapOutcome {
    /// Draws on the scale of [`super::LqlrFit::oriented`].
    pub fn oriented_draws(&self) -> &[f64] {
        if self.oriented_roots.is_empty() {
            &self.draws
        } else {
            &self.oriented_roots
        }
    }
}

pub fn bootstrap_critical_value(
    data: &[f64],
    spec: &HypothesisSpec,
    q: LqParam,
    b: usize,
    seed: u64,
) -> Result<BootstrapOutcome> {
    bootstrap_critical_value_with(data, spec, q, b, seed, &super::fit_options())
}

pub(crate) fn bootstrap_critical_value_with(
    data: &[f64],
    spec: &HypothesisSpec,
    q: LqParam,
    b: usize,
    seed: u64,
    opts: &MlqeOptions,
) -> Result<BootstrapOutcome> {
    if b < 100 {
        return Err(LqError::InvalidParameter(format!("bootstrap size must be at least 100, got {b}")));
    }
    let fam = &spec.family;
    let d = fam.dim_x();
    let theta_hat = mlqe_with(data, fam, q, &[], None, opts)?.theta_hat;
    let shifted = shift_to_null(data, spec, &theta_hat)?;

    let (stats, redraws) = resample_statistics(&shifted, d, b, seed, |x| {
        let fit = lqlr_fit_with(x, spec, q, opts)?;
        Ok((fit.d_q, fit.oriented_root))
    })?;
    let draws: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let oriented_roots: Vec<f64> = stats.iter().filter_map(|s| s.1).collect();
    let critical_value = empirical_quantile(&draws, 1.0 - spec.alpha);
    Ok(BootstrapOutcome { critical_value, draws, oriented_roots, theta_hat, redraws })
}

/// Translate the tested location coordinates of `data` from `theta_hat` to
/// the null values.
pub(crate) fn shift_to_null(data: &[f64], spec: &HypothesisSpec, theta_hat: &[f64]) -> Result<Vec<f64>> {
    let fam = &spec.family;
    let d = fam.dim_x();
    let mut shift = vec![0.0; d];
    for (k, &v) in spec.null_values.iter().enumerate() {
        let axis = fam.location_axis(k).ok_or_else(|| {
            LqError::Unsupported(format!("tested coordinate {k} is not a location parameter; cannot shift"))
        })?;
        shift[axis] = v - theta_hat[k];
    }
    let mut out = data.to_vec();
    for x in out.chunks_exact_mut(d) {
        for (xi, s) in x.iter_mut().zip(&shift) {
            *xi += s;
        }
    }
    Ok(out)
}

/// Evaluate `stat` on `b` with-replacement resamples of the points in
/// `data` (flat, `dim` values per point). A failing resample is redrawn;
/// more than 10% redraws overall is an error.
pub fn resample_statistics<T, S>(data: &[f64], dim: usize, b: usize, seed: u64, stat: S) -> Result<(Vec<T>, usize)>
where
    T: Send,
    S: Fn(&[f64]) -> Result<T> + Sync,
{
    let n = data.len() / dim;
    if n == 0 {
        return Err(LqError::InsufficientData("cannot resample an empty sample".into()));
    }
    let results: Vec<Option<(T, u64)>> = (0..b as u64)
        .into_par_iter()
        .map(|rep| {
            let mut buf = Vec::with_capacity(data.len());
            for attempt in 0..MAX_ATTEMPTS {
                let mut rng = seed::rng_for(seed, &[rep, attempt]);
                buf.clear();
                for _ in 0..n {
                    let i = rng.random_range(0..n);
                    buf.extend_from_slice(&data[i * dim..(i + 1) * dim]);
                }
                if let Ok(v) = stat(&buf) {
                    return Some((v, attempt));
                }
            }
            None
        })
        .collect();

    let mut redraws = 0usize;
    let mut out = Vec::with_capacity(b);
    for r in results {
        match r {
            Some((v, attempts)) => {
                redraws += attempts as usize;
                out.push(v);
            }
            None => return Err(LqError::BootstrapFailure { redraws: redraws + MAX_ATTEMPTS as usize, requested: b }),
        }
    }
    if redraws * 10 > b {
        return Err(LqError::BootstrapFailure { redraws, requested: b });
    }
    Ok((out, redraws))
}

/// Quantile with linear interpolation between order statistics
/// (1-based index `h = (B - 1) p + 1`).
pub fn empirical_quantile(draws: &[f64], p: f64) -> f64 {
    assert!(!draws.is_empty(), "quantile of an empty sample");
    let mut v = draws.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let h = (v.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// `(1 + #{draw ≥ observed}) / (B + 1)`.
pub fn exceedance_p_value(draws: &[f64], observed: f64) -> f64 {
    let exceed = draws.iter().filter(|&&v| v >= observed).count();
    (1 + exceed) as f64 / (draws.len() + 1) as f64
}
