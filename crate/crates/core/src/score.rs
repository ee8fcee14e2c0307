//! Lq score functions: `ψ_q = ∂/∂θ L_q(f)` and `ψ'_q = ∂²/∂θ² L_q(f)`.
//!
//! With `s = ∂ log f` and `H = ∂² log f`,
//!
//! ```text
//! ψ_q  = f^{1-q} s
//! ψ'_q = f^{1-q} (H + (1-q) s sᵀ)  =  f^{1-q} (f''/f - q s sᵀ)
//! ```
//!
//! `f^{1-q}` is taken from the log-density so a density that underflows
//! yields a zero weight instead of `0 * inf`.

use nalgebra::{DMatrix, DVector};

use crate::family::ParametricFamily;
use crate::lq::{lq_of_log, power_weight, LqParam};

pub fn psi_q<F: ParametricFamily + ?Sized>(fam: &F, x: &[f64], theta: &[f64], q: LqParam) -> DVector<f64> {
    let w = power_weight(fam.log_density(x, theta), q);
    if w == 0.0 {
        return DVector::zeros(fam.dim_theta());
    }
    fam.score(x, theta) * w
}

pub fn psi_q_prime<F: ParametricFamily + ?Sized>(
    fam: &F,
    x: &[f64],
    theta: &[f64],
    q: LqParam,
) -> DMatrix<f64> {
    let p = fam.dim_theta();
    let w = power_weight(fam.log_density(x, theta), q);
    if w == 0.0 {
        return DMatrix::zeros(p, p);
    }
    let s = fam.score(x, theta);
    (fam.log_density_hess(x, theta) + (&s * s.transpose()) * q.one_minus()) * w
}

/// `L_q(f(x; θ))` with the density floor applied.
#[inline]
pub fn lq_density<F: ParametricFamily + ?Sized>(fam: &F, x: &[f64], theta: &[f64], q: LqParam) -> f64 {
    lq_of_log(fam.log_density(x, theta), q)
}

/// `Σ_i L_q(f(x_i; θ))` over a flat sample.
pub fn lq_likelihood<F: ParametricFamily + ?Sized>(fam: &F, data: &[f64], theta: &[f64], q: LqParam) -> f64 {
    data.chunks_exact(fam.dim_x())
        .map(|x| lq_density(fam, x, theta, q))
        .sum()
}

/// `S_n = Σ_i ψ_q(x_i; θ)`.
pub fn score_sum<F: ParametricFamily + ?Sized>(fam: &F, data: &[f64], theta: &[f64], q: LqParam) -> DVector<f64> {
    data.chunks_exact(fam.dim_x())
        .fold(DVector::zeros(fam.dim_theta()), |acc, x| acc + psi_q(fam, x, theta, q))
}
