//! Sandwich matrices `A = E_h[ψ_q ψ_qᵀ]`, `B = -E_h[ψ'_q]` and the
//! distortion eigenvalues of `A (B⁻¹ - B*)`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::expectation::{expect, ExpectationMeta, ExpectationMethod};
use crate::error::{LqError, Result};
use crate::family::ParametricFamily;
use crate::lq::LqParam;
use crate::mixture::GrossErrorModel;
use crate::score::{psi_q, psi_q_prime};

/// Eigenvalues at or below this are treated as the structural zeros of the
/// nuisance block.
pub const ZERO_EIGEN: f64 = 1e-8;
/// Condition number above which `B` is reported singular.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, PartialEq)]
pub struct SandwichMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// `(B_ββ)⁻¹` in the nuisance block, zero elsewhere.
    pub b_star: DMatrix<f64>,
    /// Size of the tested block (the first `r` coordinates).
    pub r: usize,
    /// Positive eigenvalues of `A (B⁻¹ - B*)`, descending.
    pub lambdas: Vec<f64>,
    /// Batch-means standard errors of `lambdas`, Monte Carlo only.
    pub lambda_stderr: Option<Vec<f64>>,
    /// `E_h[ψ_q]`; zero at the pseudo-true parameter.
    pub mean_psi: Vec<f64>,
    pub condition_number: f64,
    pub expectation_meta: ExpectationMeta,
}

impl SandwichMatrices {
    /// Eigenvalues of `A B⁻¹`, descending.
    pub fn ab_inv_eigenvalues(&self) -> Vec<f64> {
        let b_inv = self.b.clone().try_inverse().expect("checked invertible");
        let half = sym_sqrt(&self.a);
        let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(&(&half * b_inv * &half))).eigenvalues.iter().copied().collect();
        ev.sort_by(|x, y| y.total_cmp(x));
        ev
    }

    /// `λ_max(A) / λ_min(B)`, an upper bound on the eigenvalues of `A B⁻¹`.
    pub fn eigen_bound(&self) -> f64 {
        let a = SymmetricEigen::new(symmetrize(&self.a)).eigenvalues;
        let b = SymmetricEigen::new(symmetrize(&self.b)).eigenvalues;
        a.max() / b.min()
    }

    /// Sandwich variance `(B⁻¹ A B⁻¹)_{00}` of the first coordinate.
    pub fn variance_first(&self) -> f64 {
        let b_inv = self.b.clone().try_inverse().expect("checked invertible");
        (&b_inv * &self.a * &b_inv)[(0, 0)]
    }
}

fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

fn sym_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(symmetrize(m));
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

fn condition(b: &DMatrix<f64>) -> f64 {
    let sv = b.clone().svd(false, false).singular_values;
    let (hi, lo) = (sv.max(), sv.min());
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// `(λ, B*, cond(B))` from `A`, `B` and the tested block size.
pub fn distortion(a: &DMatrix<f64>, b: &DMatrix<f64>, r: usize) -> Result<(Vec<f64>, DMatrix<f64>, f64)> {
    let p = b.nrows();
    let cond = condition(b);
    let singular = |what: &str, c: f64| LqError::Singular(format!("{what} is singular (condition number {c:.3e})"));
    if !(cond <= MAX_CONDITION) {
        return Err(singular("B", cond));
    }
    let b_inv = b.clone().try_inverse().ok_or_else(|| singular("B", cond))?;
    let mut b_star = DMatrix::zeros(p, p);
    if r < p {
        let nuis = b.view((r, r), (p - r, p - r)).into_owned();
        let c = condition(&nuis);
        if !(c <= MAX_CONDITION) {
            return Err(singular("nuisance block of B", c));
        }
        let inv = nuis.try_inverse().ok_or_else(|| singular("nuisance block of B", c))?;
        b_star.view_mut((r, r), (p - r, p - r)).copy_from(&inv);
    }
    let half = sym_sqrt(a);
    let m = symmetrize(&(b_inv - &b_star));
    let mut ev: Vec<f64> = SymmetricEigen::new(symmetrize(&(&half * m * &half)))
        .eigenvalues
        .iter()
        .copied()
        .filter(|&v| v > ZERO_EIGEN)
        .collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    ev.truncate(r);
    Ok((ev, b_star, cond))
}

/// `E_h[ψ]`, `A` and `B` packed as `[ψ (p), ψψᵀ (p²), -ψ' (p²)]`.
fn moments<F: ParametricFamily + ?Sized>(
    model: &GrossErrorModel,
    fam: &F,
    theta: &[f64],
    q: LqParam,
    method: ExpectationMethod,
) -> Result<super::expectation::Expectation> {
    let p = fam.dim_theta();
    expect(model, p + 2 * p * p, method, |x, out| {
        let psi = psi_q(fam, x, theta, q);
        let jac = psi_q_prime(fam, x, theta, q);
        for i in 0..p {
            out[i] = psi[i];
            for j in 0..p {
                out[p + i * p + j] = psi[i] * psi[j];
                out[p + p * p + i * p + j] = -jac[(i, j)];
            }
        }
    })
}

fn unpack(v: &[f64], p: usize) -> (Vec<f64>, DMatrix<f64>, DMatrix<f64>) {
    (
        v[..p].to_vec(),
        DMatrix::from_row_slice(p, p, &v[p..p + p * p]),
        DMatrix::from_row_slice(p, p, &v[p + p * p..]),
    )
}

/// Sandwich matrices of the MLqE for `fam` at `theta` with data from
/// `model`, testing the first `r` coordinates.
pub fn sandwich<F: ParametricFamily + ?Sized>(
    model: &GrossErrorModel,
    fam: &F,
    theta: &[f64],
    q: LqParam,
    r: usize,
    method: ExpectationMethod,
) -> Result<SandwichMatrices> {
    fam.validate_theta(theta)?;
    let p = fam.dim_theta();
    if r == 0 || r > p {
        return Err(LqError::InvalidParameter(format!("tested block size must be in 1..={p}, got {r}")));
    }
    if fam.dim_x() != model.dim_x() {
        return Err(LqError::InvalidParameter("model and family observation dimensions differ".into()));
    }
    let e = moments(model, fam, theta, q, method)?;
    let (mean_psi, a, b) = unpack(&e.values, p);
    let (lambdas, b_star, condition_number) = distortion(&a, &b, r)?;

    let lambda_stderr = e.batches.as_ref().map(|batches| {
        let per: Vec<Vec<f64>> = batches
            .iter()
            .filter_map(|v| {
                let (_, a, b) = unpack(v, p);
                distortion(&a, &b, r).ok().map(|d| d.0).filter(|l| l.len() == lambdas.len())
            })
            .collect();
        let nb = per.len() as f64;
        (0..lambdas.len())
            .map(|j| {
                let m = per.iter().map(|l| l[j]).sum::<f64>() / nb;
                let var = per.iter().map(|l| (l[j] - m).powi(2)).sum::<f64>() / (nb - 1.0);
                (var / nb).sqrt()
            })
            .collect()
    });

    Ok(SandwichMatrices {
        a,
        b,
        b_star,
        r,
        lambdas,
        lambda_stderr,
        mean_psi,
        condition_number,
        expectation_meta: e.meta,
    })
}

/// Solve `E_h[ψ_q(X; θ)] = 0` over the coordinates not listed in `fixed`,
/// by Newton steps with Jacobian `-B`.
pub fn pseudo_true_theta<F: ParametricFamily + ?Sized>(
    model: &GrossErrorModel,
    fam: &F,
    q: LqParam,
    fixed: &[(usize, f64)],
    init: &[f64],
    method: ExpectationMethod,
) -> Result<Vec<f64>> {
    let p = fam.dim_theta();
    let mut theta = init.to_vec();
    for &(k, v) in fixed {
        theta[k] = v;
    }
    fam.validate_theta(&theta)?;
    let free: Vec<usize> = (0..p).filter(|k| !fixed.iter().any(|f| f.0 == *k)).collect();
    if free.is_empty() {
        return Ok(theta);
    }
    let k = free.len();
    for iter in 0..100 {
        let e = moments(model, fam, &theta, q, method)?;
        let (g, _, b) = unpack(&e.values, p);
        let bf = DMatrix::from_fn(k, k, |i, j| b[(free[i], free[j])]);
        let gf = nalgebra::DVector::from_fn(k, |i, _| g[free[i]]);
        let step = bf
            .clone()
            .try_inverse()
            .ok_or_else(|| LqError::Singular(format!("B singular (condition number {:.3e})", condition(&bf))))?
            * gf;
        let mut t = 1.0;
        loop {
            let mut cand = theta.clone();
            for (i, &c) in free.iter().enumerate() {
                cand[c] += t * step[i];
            }
            if fam.validate_theta(&cand).is_ok() {
                theta = cand;
                break;
            }
            t *= 0.5;
            if t < 1e-10 {
                return Err(LqError::Domain("pseudo-true parameter left the parameter space".into()));
            }
        }
        let scale = theta.iter().map(|v| v.abs()).fold(1.0, f64::max);
        if t * step.amax() <= 1e-11 * scale {
            return Ok(theta);
        }
        if iter == 99 {
            return Err(LqError::NoConvergence { iterations: 100, last_step: t * step.amax(), trace: Vec::new() });
        }
    }
    unreachable!()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{Family, NormalKnownVariance};
    use crate::mixture::Gaussian;

    fn quad() -> ExpectationMethod {
        ExpectationMethod::Quadrature { tol: 1e-10 }
    }

    fn known(eps: f64, var_g: f64) -> GrossErrorModel {
        GrossErrorModel::new(
            Family::normal_known_variance(1.0).unwrap(),
            vec![0.0],
            Gaussian::univariate(0.0, var_g).unwrap(),
            eps,
        )
        .unwrap()
    }

    #[test]
    fn clean_fisher_information() {
        let s = sandwich(&known(0.0, 10.0), &NormalKnownVariance::standard(), &[0.0], LqParam::ONE, 1, quad()).unwrap();
        assert!((s.a[(0, 0)] - 1.0).abs() < 1e-9);
        assert!((s.b[(0, 0)] - 1.0).abs() < 1e-9);
        assert!((s.lambdas[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn contaminated_mle_ratio_closed_form() {
        // at q = 1, A = E_h[x²] = 1 + 9ε and B = 1
        for &eps in &[0.05, 0.1, 0.2] {
            let s = sandwich(&known(eps, 10.0), &NormalKnownVariance::standard(), &[0.0], LqParam::ONE, 1, quad()).unwrap();
            assert!((s.lambdas[0] - (1.0 + 9.0 * eps)).abs() < 1e-8);
        }
    }

    #[test]
    fn location_scale_clean_is_identity_on_tested_block() {
        let m = GrossErrorModel::new(Family::NormalLocationScale, vec![0.0, 1.0], Gaussian::univariate(0.0, 50.0).unwrap(), 0.0).unwrap();
        let s = sandwich(&m, &Family::NormalLocationScale, &[0.0, 1.0], LqParam::ONE, 1, quad()).unwrap();
        assert_eq!(s.lambdas.len(), 1);
        assert!((s.lambdas[0] - 1.0).abs() < 1e-8);
        assert!((s.b[(1, 1)] - 2.0).abs() < 1e-8);
        assert!((s.b_star[(1, 1)] - 0.5).abs() < 1e-8);
        assert_eq!(s.b_star[(0, 0)], 0.0);
    }

    #[test]
    fn pseudo_true_scale_shrinks_with_q() {
        // clean normal: the MLqE scale converges to √q σ
        let m = GrossErrorModel::new(Family::NormalLocationScale, vec![0.0, 2.0], Gaussian::univariate(0.0, 1.0).unwrap(), 0.0).unwrap();
        let q = LqParam::new(0.8).unwrap();
        let t = pseudo_true_theta(&m, &Family::NormalLocationScale, q, &[(0, 0.0)], &[0.0, 2.0], quad()).unwrap();
        assert!((t[1] - 2.0 * 0.8f64.sqrt()).abs() < 1e-8, "{t:?}");
        let s = sandwich(&m, &Family::NormalLocationScale, &t, q, 1, quad()).unwrap();
        assert!(s.mean_psi.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn singular_b_is_reported() {
        let a = DMatrix::identity(2, 2);
        let b = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        match distortion(&a, &b, 1) {
            Err(LqError::Singular(msg)) => assert!(msg.contains("condition number")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn eigen_bound_holds() {
        for &eps in &[0.0, 0.1, 0.3] {
            for &qv in &[0.6, 0.9, 1.0] {
                let s = sandwich(
                    &known(eps, 10.0),
                    &NormalKnownVariance::standard(),
                    &[0.0],
                    LqParam::new(qv).unwrap(),
                    1,
                    quad(),
                )
                .unwrap();
                assert!(s.ab_inv_eigenvalues()[0] <= s.eigen_bound() * (1.0 + 1e-12));
            }
        }
    }
}
