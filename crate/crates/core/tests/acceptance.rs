//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! `LQLR_ACCEPTANCE=1,5` runs a subset.

use std::time::Instant;

use lqlr::asymptotics::{
    eigenvalue_curves, optimal_q, ratio_surface, sandwich, variance_curve, ExpectationMethod, WeightedChiSquare,
};
use lqlr::family::mean;
use lqlr::hypothesis::{
    bootstrap_critical_value, lqlr_statistic, lqlr_test, t_test, wilcoxon_exact_upper_tail, Alternative,
    HypothesisSpec, LqlrOptions, QChoice,
};
use lqlr::score::lq_likelihood;
use lqlr::simharness::{qhat_histogram, qhat_median, run_experiment, ExperimentResult, ExperimentSpec, Kind};
use lqlr::{mlqe, psi_q, psi_q_prime, Family, Gaussian, GrossErrorModel, LqParam, ParametricFamily};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

const SLEEP: [f64; 10] = [1.2, 2.4, 1.3, 1.3, 0.0, 1.0, 1.8, 0.8, 4.6, 1.4];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn normal_sample(rng: &mut ChaCha8Rng, n: usize, mu: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let z: f64 = StandardNormal.sample(rng);
            mu + z
        })
        .collect()
}

fn criterion_1() -> Outcome {
    let fam = Family::normal_known_variance(1.0).unwrap();
    let spec = HypothesisSpec::location(fam.clone(), 0.0, Alternative::TwoSided, 0.05).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(10..200);
        let shift = rng.random_range(-1.0..1.0);
        let data = normal_sample(&mut rng, n, shift);
        let d = lqlr_statistic(&data, &spec, LqParam::ONE).unwrap();
        let oracle = n as f64 * mean(&data).powi(2);
        worst = worst.max((d - oracle).abs() / (1.0 + oracle));
    }
    // A single data set's critical value is about s² χ²₁(0.95), whose spread
    // (sd ≈ 0.38 at n = 200) is comparable to the tolerance, so the check
    // uses the median over independent data sets.
    let mut cvs: Vec<f64> = (0..21u64)
        .map(|k| {
            let data = normal_sample(&mut rng, 200, 0.0);
            bootstrap_critical_value(&data, &spec, LqParam::ONE, 4000, 7 + k).unwrap().critical_value
        })
        .collect();
    cvs.sort_by(|a, b| a.total_cmp(b));
    let median = cvs[cvs.len() / 2];
    let chi = ChiSquared::new(1.0).unwrap().inverse_cdf(0.95);
    let pass = worst < 1e-8 && (median - chi).abs() <= 0.4;
    outcome(
        pass,
        format!(
            "max rel. error {worst:.2e}; bootstrap cv median {median:.3} (range {:.3}..{:.3} over {} data sets) vs chi2_1 {chi:.3}",
            cvs[0],
            cvs[cvs.len() - 1],
            cvs.len()
        ),
    )
}

fn criterion_2() -> Outcome {
    let n = SLEEP.len() as f64;
    let m = SLEEP.iter().sum::<f64>() / n;
    let s = (SLEEP.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t_oracle = m / (s / n.sqrt());
    let t = t_test(&SLEEP, 0.0, Alternative::Greater, 0.05).unwrap();
    let mut at16 = SLEEP;
    at16[8] = 16.0;
    let t16 = t_test(&at16, 0.0, Alternative::Greater, 0.05).unwrap();

    let spec = HypothesisSpec::location(Family::NormalLocationScale, 0.0, Alternative::Greater, 0.05).unwrap();
    let opts = LqlrOptions { q: QChoice::Fixed(LqParam::new(0.85).unwrap()), bootstrap: 2000, seed: 2024 };
    let mut ps = Vec::new();
    let mut all_reject = true;
    for d9 in [4.6, 8.0, 12.0, 16.0] {
        let mut data = SLEEP;
        data[8] = d9;
        let r = lqlr_test(&data, &spec, &opts).unwrap();
        all_reject &= r.reject;
        ps.push(r.p_value);
    }
    let monotone = ps.windows(2).all(|w| w[1] <= w[0]);
    let pass = t.p_value < 0.05
        && (t.statistic - t_oracle).abs() < 0.01
        && (t.statistic - 4.06).abs() < 0.01
        && t16.p_value > 0.05
        && all_reject
        && monotone;
    outcome(
        pass,
        format!(
            "t = {:.4} (oracle {t_oracle:.4}), p = {:.4}; p at 16 = {:.3}; LqLR p = {ps:?}",
            t.statistic, t.p_value, t16.p_value
        ),
    )
}

fn criterion_3() -> Outcome {
    let fam = Family::normal_known_variance(1.0).unwrap();
    let g = Gaussian::univariate(0.0, 10.0).unwrap();
    let eps = [0.05, 0.1, 0.2];
    let q_grid: Vec<f64> = (0..=50).map(|k| 0.5 + 0.01 * k as f64).collect();
    let rows = ratio_surface(&fam, &[0.0], &g, &eps, &q_grid).unwrap();
    let at = |e: f64, q: f64| rows.iter().find(|r| r.eps == e && (r.q - q).abs() < 1e-12).unwrap().ratio;
    let at_one: Vec<f64> = eps.iter().map(|&e| at(e, 1.0)).collect();
    let inflated = at_one.iter().all(|&r| r > 1.0) && at_one.windows(2).all(|w| w[1] > w[0]);
    let shrinks = eps.iter().all(|&e| {
        rows.iter().filter(|r| r.eps == e && r.q < 1.0).any(|r| (r.ratio - 1.0).abs() < (at(e, 1.0) - 1.0).abs())
    });
    outcome(inflated && shrinks, format!("A/B at q=1: {at_one:.4?}; some q<1 closer to 1: {shrinks}"))
}

fn criterion_4() -> Outcome {
    let cov = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 2.0]);
    let fam = Family::mvn_known_covariance(cov.clone()).unwrap();
    let g = Gaussian::new(vec![0.0, 0.0], cov * 30.0).unwrap();
    let method = ExpectationMethod::MonteCarlo { draws: 1_000_000, seed: 404 };
    let rows = eigenvalue_curves(&fam, &[0.0, 0.0], &g, 2, &[0.05, 0.1], &[0.97, 1.0], method).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for eps in [0.05, 0.1] {
        for j in 0..2 {
            let get = |q: f64| rows.iter().find(|r| r.eps == eps && r.q == q && r.index == j).unwrap();
            let (one, low) = (get(1.0), get(0.97));
            let (se1, se97) = (one.stderr.unwrap(), low.stderr.unwrap());
            pass &= one.lambda - 1.0 > 3.0 * se1;
            pass &= (one.lambda - 1.0).abs() - (low.lambda - 1.0).abs() > 3.0 * (se1 * se1 + se97 * se97).sqrt();
            detail.push(format!("eps {eps} j{j}: {:.3}±{se1:.3} -> {:.3}±{se97:.3}", one.lambda, low.lambda));
        }
    }
    outcome(pass, detail.join("; "))
}

fn ks_distance(sample: &mut [f64], law: &WeightedChiSquare) -> f64 {
    sample.sort_by(|a, b| a.total_cmp(b));
    let m = sample.len() as f64;
    sample
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            (f - i as f64 / m).abs().max((f - (i + 1) as f64 / m).abs())
        })
        .fold(0.0, f64::max)
}

fn criterion_5() -> Outcome {
    use rayon::prelude::*;
    let fam = Family::mvn_known_covariance(DMatrix::identity(3, 3)).unwrap();
    let g = Gaussian::new(vec![0.0; 3], DMatrix::identity(3, 3) * 30.0).unwrap();
    let spec = HypothesisSpec::new(fam.clone(), vec![0.0; 3], Alternative::TwoSided, 0.05).unwrap();
    let mut pass = true;
    let mut detail = Vec::new();
    for (eps, qv) in [(0.0, 1.0), (0.1, 1.0), (0.1, 0.8)] {
        let q = LqParam::new(qv).unwrap();
        let model = GrossErrorModel::new(fam.clone(), vec![0.0; 3], g.clone(), eps).unwrap();
        let s = sandwich(&model, &fam, &[0.0; 3], q, 3, ExpectationMethod::default_for(3)).unwrap();
        let law = WeightedChiSquare::new(&s.lambdas).unwrap();
        let mut sims: Vec<f64> = (0..2000u64)
            .into_par_iter()
            .map(|i| {
                let data = model.sample(500, lqlr::seed::derive(505, &[(eps * 100.0) as u64, (qv * 100.0) as u64, i]));
                lqlr_statistic(&data, &spec, q).unwrap()
            })
            .collect();
        let ks = ks_distance(&mut sims, &law);
        pass &= ks <= 0.06;
        detail.push(format!("(eps {eps}, q {qv}): lambda {:.3?}, KS {ks:.4}", s.lambdas));
    }
    outcome(pass, detail.join("; "))
}

fn load_spec(json: &str) -> ExperimentSpec {
    serde_json::from_str(json).unwrap()
}

fn estimate(r: &ExperimentResult, method: &str, q: &str, eps: f64, kind: Kind) -> (f64, f64) {
    let row = r.row(method, q, eps, kind).unwrap_or_else(|| panic!("missing row {method} {q} {eps} {kind}"));
    (row.estimate, row.stderr)
}

fn criterion_6() -> Outcome {
    let spec = load_spec(
        r#"{
            "family": {"kind": "normal_location_scale"},
            "theta_null": 0.0,
            "theta_alt": 0.34,
            "contamination": {"type": "normal", "variance": 50.0},
            "eps_grid": [0.0, 0.1, 0.2],
            "n": 50,
            "methods": [
                {"method": "lqlr", "q": 1.0},
                {"method": "lqlr", "q": 0.9},
                {"method": "lqlr", "q": 0.6},
                {"method": "lr_t"},
                {"method": "wilcoxon"},
                {"method": "sign"},
                {"method": "huber", "c_low": 0.1, "c_high": 10.0}
            ],
            "M": 1000,
            "base_seed": 4,
            "B": 400
        }"#,
    );
    let r = run_experiment(&spec).unwrap();
    let invalid = r.cells.iter().filter(|c| c.invalid).count();
    let sizes: Vec<&lqlr::simharness::ResultRow> = r.rows.iter().filter(|x| x.kind == Kind::Size).collect();
    let bad_sizes: Vec<String> = sizes
        .iter()
        .filter(|x| (x.estimate - 0.05).abs() > 0.02)
        .map(|x| format!("{}({}) eps {}: {:.3}", x.method, x.q, x.eps, x.estimate))
        .collect();
    let p = |q: &str, eps: f64| estimate(&r, "lqlr", q, eps, Kind::Power).0;
    let delta = 50f64.sqrt() * 0.34;
    let z = Normal::standard().inverse_cdf(0.975);
    let oracle = Normal::standard().cdf(delta - z) + Normal::standard().cdf(-delta - z);
    let b = p("1", 0.0) > p("0.9", 0.0) && p("0.9", 0.0) > p("0.6", 0.0) && (p("1", 0.0) - oracle).abs() <= 0.05;
    let c = p("0.6", 0.2) > p("1", 0.2);
    let range = |method: &str, q: &str| {
        let v: Vec<f64> = [0.0, 0.1, 0.2].iter().map(|&e| estimate(&r, method, q, e, Kind::Power).0).collect();
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
    };
    let d = range("lqlr", "0.6") < range("lr_t", "");
    let pass = invalid == 0 && bad_sizes.is_empty() && b && c && d;
    outcome(
        pass,
        format!(
            "(a) sizes off-band: {bad_sizes:?}, invalid cells {invalid}; (b) power q=1/0.9/0.6 at eps 0: {:.3}/{:.3}/{:.3}, oracle {oracle:.3}; (c) eps 0.2: q=0.6 {:.3} vs q=1 {:.3}; (d) range q=0.6 {:.3} vs lr_t {:.3}",
            p("1", 0.0),
            p("0.9", 0.0),
            p("0.6", 0.0),
            p("0.6", 0.2),
            p("1", 0.2),
            range("lqlr", "0.6"),
            range("lr_t", "")
        ),
    )
}

fn criterion_7() -> Outcome {
    let spec = load_spec(
        r#"{
            "family": {"kind": "normal_location_scale"},
            "theta_null": 0.0,
            "theta_alt": 0.34,
            "contamination": {"type": "point_mass", "location": -5.0},
            "eps_grid": [0.0, 0.1, 0.2],
            "n": 50,
            "methods": [
                {"method": "lqlr_adaptive"},
                {"method": "lr_t"},
                {"method": "wilcoxon"},
                {"method": "sign"}
            ],
            "M": 1000,
            "base_seed": 9,
            "B": 400
        }"#,
    );
    let r = run_experiment(&spec).unwrap();
    let (t_size, t_se) = estimate(&r, "lr_t", "", 0.1, Kind::Size);
    let (a_size, a_se) = estimate(&r, "lqlr_adaptive", "adaptive", 0.1, Kind::Size);
    let mut pass = t_size > 0.05 + 3.0 * t_se && (a_size - 0.05).abs() <= 3.0 * a_se.max(1e-12);
    let mut powers = Vec::new();
    for &eps in &spec.eps_grid {
        let a = estimate(&r, "lqlr_adaptive", "adaptive", eps, Kind::Power).0;
        let w = estimate(&r, "wilcoxon", "", eps, Kind::Power).0;
        let s = estimate(&r, "sign", "", eps, Kind::Power).0;
        pass &= a >= w && a >= s;
        powers.push(format!("eps {eps}: {a:.3}/{w:.3}/{s:.3}"));
    }
    pass &= r.cells.iter().all(|c| !c.invalid);
    outcome(
        pass,
        format!(
            "size at eps 0.1: lr_t {t_size:.3} (se {t_se:.3}), adaptive {a_size:.3} (se {a_se:.3}); power adaptive/wilcoxon/sign: {}",
            powers.join(", ")
        ),
    )
}

fn criterion_8() -> Outcome {
    let eps_grid = [0.0, 0.05, 0.1, 0.2];
    let q_grid: Vec<f64> = (0..=50).map(|k| 0.5 + 0.01 * k as f64).collect();
    let mut argmins = Vec::new();
    for &eps in &eps_grid {
        let model = GrossErrorModel::new(
            Family::NormalLocationScale,
            vec![0.0, 1.0],
            Gaussian::univariate(0.0, 50.0).unwrap(),
            eps,
        )
        .unwrap();
        let curve = variance_curve(&model, &[0.0, 1.0], &q_grid).unwrap();
        argmins.push(optimal_q(&curve).unwrap());
    }
    let theory = argmins.windows(2).all(|w| w[1] <= w[0] + 1e-12)
        && argmins.iter().zip(&eps_grid).filter(|(_, &e)| e >= 0.05).all(|(&q, _)| (0.6..=0.9).contains(&q));

    let spec = load_spec(
        r#"{
            "family": {"kind": "normal_location_scale"},
            "theta_null": 0.0,
            "contamination": {"type": "normal", "variance": 50.0},
            "eps_grid": [0.0, 0.05, 0.1, 0.2],
            "n": 50,
            "methods": [{"method": "lqlr_adaptive"}],
            "M": 1000,
            "base_seed": 8
        }"#,
    );
    let hist = qhat_histogram(&spec).unwrap();
    let medians: Vec<f64> = hist.iter().map(|(_, v)| qhat_median(v)).collect();
    let floor_ok = hist.iter().all(|(_, v)| v.iter().all(|&q| q >= 0.5));
    let empirical = medians.windows(2).all(|w| w[1] <= w[0]) && floor_ok;
    outcome(
        theory && empirical,
        format!("argmin V_q over eps {eps_grid:?}: {argmins:?}; median q-hat: {medians:?}; floor respected: {floor_ok}"),
    )
}

fn mlqe_grid_suite() -> (bool, String) {
    let fam = Family::normal_known_variance(1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(8..30);
        let q = LqParam::new(rng.random_range(0.5..1.0)).unwrap();
        let data: Vec<f64> = (0..n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if rng.random::<f64>() < 0.15 {
                    z * 50f64.sqrt()
                } else {
                    z
                }
            })
            .collect();
        let lo = data.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = data.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let steps = ((hi - lo) / 1e-4).ceil() as usize;
        let (mut best, mut arg) = (f64::NEG_INFINITY, lo);
        for k in 0..=steps {
            let mu = lo + k as f64 * 1e-4;
            let v = lq_likelihood(&fam, &data, &[mu], q);
            if v > best {
                best = v;
                arg = mu;
            }
        }
        let fit = mlqe(&data, &fam, q, None).unwrap();
        worst = worst.max((fit.theta_hat[0] - arg).abs());
    }
    (worst <= 1e-3, format!("MLqE vs grid max |diff| {worst:.2e}"))
}

fn fd_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(910);
    let fams = [
        Family::normal_known_variance(1.3).unwrap(),
        Family::NormalLocationScale,
        Family::mvn_known_covariance(DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 0.5])).unwrap(),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let fam = &fams[i % 3];
        let q = LqParam::new(rng.random_range(0.5..=1.0)).unwrap();
        let mut theta: Vec<f64> = (0..fam.dim_theta()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if let Family::NormalLocationScale = fam {
            theta[1] = rng.random_range(0.5..2.0);
        }
        let x: Vec<f64> = (0..fam.dim_x()).map(|_| rng.random_range(-3.0..3.0)).collect();
        let psi = psi_q(fam, &x, &theta, q);
        let jac = psi_q_prime(fam, &x, &theta, q);
        let lq = |t: &[f64]| lqlr::lq::lq_of_log(fam.log_density(&x, t), q);
        let h = 1e-5;
        for k in 0..fam.dim_theta() {
            let mut up = theta.clone();
            let mut dn = theta.clone();
            up[k] += h;
            dn[k] -= h;
            let fd = (lq(&up) - lq(&dn)) / (2.0 * h);
            worst = worst.max((fd - psi[k]).abs() / (1e-3 + psi[k].abs()));
            let dpsi = (psi_q(fam, &x, &up, q) - psi_q(fam, &x, &dn, q)) / (2.0 * h);
            for j in 0..fam.dim_theta() {
                worst = worst.max((dpsi[j] - jac[(j, k)]).abs() / (1e-3 + jac[(j, k)].abs()));
            }
        }
    }
    (worst <= 1e-5, format!("psi/psi' finite-difference rel. error {worst:.2e}"))
}

fn wilcoxon_suite() -> (bool, String) {
    let mut worst: f64 = 0.0;
    for n in 1..=12usize {
        let mut rank_sets = vec![(1..=n).map(|r| r as f64).collect::<Vec<_>>()];
        if n >= 3 {
            let mut tied: Vec<f64> = (1..=n).map(|r| r as f64).collect();
            tied[0] = 1.5;
            tied[1] = 1.5;
            rank_sets.push(tied);
        }
        for ranks in rank_sets {
            let mut sums = Vec::with_capacity(1 << n);
            for mask in 0u32..(1 << n) {
                sums.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum::<f64>());
            }
            let total: f64 = ranks.iter().sum();
            let mut w = 0.0;
            while w <= total {
                let count = sums.iter().filter(|&&s| s >= w - 1e-9).count() as f64 / (1u64 << n) as f64;
                worst = worst.max((wilcoxon_exact_upper_tail(&ranks, w) - count).abs());
                w += 0.5;
            }
        }
    }
    (worst < 1e-12, format!("Wilcoxon tail vs 2^n enumeration max diff {worst:.1e}"))
}

fn equivariance_suite() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(911);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let data = normal_sample(&mut rng, 40, 0.2);
        let c = rng.random_range(-20.0..20.0);
        let shifted: Vec<f64> = data.iter().map(|x| x + c).collect();
        let q = LqParam::new(rng.random_range(0.6..=1.0)).unwrap();
        for fam in [Family::normal_known_variance(1.0).unwrap(), Family::NormalLocationScale] {
            let a = mlqe(&data, &fam, q, None).unwrap().theta_hat;
            let b = mlqe(&shifted, &fam, q, None).unwrap().theta_hat;
            worst = worst.max((b[0] - a[0] - c).abs());
            let s0 = HypothesisSpec::location(fam.clone(), 0.1, Alternative::TwoSided, 0.05).unwrap();
            let s1 = HypothesisSpec::location(fam.clone(), 0.1 + c, Alternative::TwoSided, 0.05).unwrap();
            let d0 = lqlr_statistic(&data, &s0, q).unwrap();
            let d1 = lqlr_statistic(&shifted, &s1, q).unwrap();
            worst = worst.max((d0 - d1).abs() / (1.0 + d0));
        }
    }
    (worst < 1e-6, format!("location equivariance max deviation {worst:.1e}"))
}

fn determinism_suite() -> (bool, String) {
    let spec = HypothesisSpec::location(Family::NormalLocationScale, 0.0, Alternative::TwoSided, 0.05).unwrap();
    let opts = LqlrOptions { q: QChoice::adaptive(), bootstrap: 300, seed: 12 };
    let data = normal_sample(&mut ChaCha8Rng::seed_from_u64(912), 30, 0.3);
    let a = lqlr_test(&data, &spec, &opts).unwrap();
    let b = lqlr_test(&data, &spec, &opts).unwrap();
    let exp = load_spec(
        r#"{"family": {"kind": "normal_location_scale"}, "theta_null": 0.0,
            "contamination": {"type": "point_mass", "location": -5.0}, "eps_grid": [0.1], "n": 20,
            "methods": [{"method": "lqlr", "q": 0.8}, {"method": "sign"}], "M": 100, "base_seed": 3, "B": 100}"#,
    );
    let r1 = run_experiment(&exp).unwrap().to_csv().unwrap();
    let r2 = run_experiment(&exp).unwrap().to_csv().unwrap();
    let w1 = WeightedChiSquare::new(&[1.5, 0.5]).unwrap().quantile(0.9).unwrap();
    let w2 = WeightedChiSquare::new(&[1.5, 0.5]).unwrap().quantile(0.9).unwrap();
    (a == b && r1 == r2 && w1 == w2, "repeated seeded runs identical".into())
}

fn criterion_9() -> Outcome {
    let parts = [mlqe_grid_suite(), fd_suite(), wilcoxon_suite(), equivariance_suite(), determinism_suite()];
    let pass = parts.iter().all(|p| p.0);
    outcome(pass, parts.iter().map(|p| p.1.clone()).collect::<Vec<_>>().join("; "))
}

fn main() {
    let criteria: [(u32, &str, fn() -> Outcome); 9] = [
        (1, "classical reduction at q = 1", criterion_1),
        (2, "sleep data", criterion_2),
        (3, "scalar A/B inflation and shrinkage", criterion_3),
        (4, "bivariate eigenvalue inflation and shrinkage", criterion_4),
        (5, "null law of D_q vs weighted chi-square", criterion_5),
        (6, "symmetric contamination size/power study", criterion_6),
        (7, "point-mass contamination study", criterion_7),
        (8, "q selection", criterion_8),
        (9, "property suites", criterion_9),
    ];
    let only: Option<Vec<u32>> = std::env::var("LQLR_ACCEPTANCE")
        .ok()
        .map(|s| s.split(',').filter_map(|t| t.trim().parse().ok()).collect());
    let mut failed = 0;
    for (id, name, run) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let res = run();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {id} [{}] {name} ({secs:.1}s): {}",
            if res.pass { "PASS" } else { "FAIL" },
            res.detail
        );
        if !res.pass {
            failed += 1;
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
