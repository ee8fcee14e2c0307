//! Large-sample theory of the MLqE and the LqLR statistic under a
//! gross-error model.
//!
//! Scale convention: `D_q` converges under the null to `Σ λ_j Z_j²`, with
//! `λ_j` the positive eigenvalues of `A (B⁻¹ - B*)`. With `q = 1` and no
//! contamination every `λ_j` is one and the law is `χ²_r`.

mod expectation;
mod influence;
pub mod quadrature;
mod sandwich;
mod summary;
mod wchisq;

pub use expectation::{
    expect, Expectation, ExpectationMeta, ExpectationMethod, DEFAULT_DRAWS, DEFAULT_MC_SEED, DEFAULT_TOLERANCE,
};
pub use influence::{influence_function, level_influence};
pub use sandwich::{distortion, pseudo_true_theta, sandwich, SandwichMatrices};
pub use summary::{
    asymptotic_summary, eigenvalue_curves, is_symmetric, optimal_q, ratio_surface, variance_curve,
    AsymptoticSummary, EigenRow, SummaryOptions, SurfaceRow,
};
pub use wchisq::{weighted_chisq_cdf, weighted_chisq_quantile, WeightedChiSquare, DEFAULT_WCHISQ_SEED};
