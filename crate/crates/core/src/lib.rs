//! Lq-likelihood ratio testing.
//!
//! The crate is layered bottom-up:
//!
//! - [`lq`], [`family`], [`score`], [`mixture`]: the Lq transform, density
//!   families with closed-form derivatives, `ψ_q`/`ψ'_q`, and gross-error
//!   models.
//! - [`estimation`]: maximum Lq-likelihood estimation (MLqE), optionally with
//!   coordinates held fixed.
//! - [`hypothesis`]: the `D_q` statistic, bootstrap calibration, adaptive
//!   choice of `q`, and the t, Wilcoxon, sign and censored-LR competitors.
//! - [`asymptotics`]: sandwich matrices, distortion eigenvalues, the
//!   weighted chi-square null law, efficacy and influence functions.
//! - [`simharness`]: seeded Monte Carlo size/power experiments.

pub mod asymptotics;
pub mod error;
pub mod estimation;
pub mod family;
pub mod hypothesis;
pub mod lq;
pub mod mixture;
pub mod score;
pub mod seed;
pub mod simharness;

pub use error::{LqError, Result};
pub use estimation::{mlqe, mlqe_constrained, mlqe_with, EstimationResult, MlqeOptions, MultiStart};
pub use family::{Family, ParametricFamily};
pub use lq::{lq_transform, LqParam};
pub use mixture::{Gaussian, GrossErrorModel};
pub use score::{psi_q, psi_q_prime};
