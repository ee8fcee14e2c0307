//! Seeded Monte Carlo size and power studies.
//!
//! Every replicate draws one dataset from the gross-error model and runs
//! every requested method on it. The data stream for replicate `i` of
//! contamination level `e` and kind `k` is `derive(base_seed, [DATA, e, k, i])`
//! and the bootstrap stream is `derive(base_seed, [BOOT, e, k, i])`. Neither
//! depends on the method list, so adding or removing a method leaves the
//! others untouched, and methods are compared on common random numbers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{LqError, Result};
use crate::family::{median, Family, ParametricFamily};
use crate::hypothesis::{
    default_q_grid, huber_censored_lr, lqlr_test, select_q, sign_test, t_test, wilcoxon_signed_rank, Alternative,
    HuberOptions, HypothesisSpec, LqlrOptions, QChoice, TestResult,
};
use crate::lq::LqParam;
use crate::mixture::{Gaussian, GrossErrorModel};
use crate::seed;

pub const DEFAULT_REPLICATES: usize = 1000;
pub const DEFAULT_BOOTSTRAP: usize = 400;
pub const DEFAULT_THETA_ALT: f64 = 0.34;
/// Largest tolerated share of failed replicates in a cell.
pub const MAX_FAILURE_SHARE: f64 = 0.05;

const DATA_STREAM: u64 = 0xDA7A;
const BOOT_STREAM: u64 = 0xB007;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Contamination {
    /// `φ(x; location, variance)`; without a location it is centred on the
    /// true parameter of each replicate.
    Normal {
        variance: f64,
        #[serde(default)]
        location: Option<f64>,
    },
    PointMass { location: f64 },
}

impl Contamination {
    fn density(&self, centre: f64) -> Result<Gaussian> {
        match *self {
            Contamination::Normal { variance, location } => Gaussian::univariate(location.unwrap_or(centre), variance),
            Contamination::PointMass { location } => Ok(Gaussian::point_mass(location)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case", deny_unknown_fields)]
pub enum MethodSpec {
    Lqlr {
        q: f64,
    },
    LqlrAdaptive {
        #[serde(default)]
        grid: Option<Vec<f64>>,
    },
    LrT,
    Wilcoxon,
    Sign,
    Huber {
        #[serde(default = "default_c_low")]
        c_low: f64,
        #[serde(default = "default_c_high")]
        c_high: f64,
    },
}

fn default_c_low() -> f64 {
    0.1
}
fn default_c_high() -> f64 {
    10.0
}

impl MethodSpec {
    pub fn name(&self) -> &'static str {
        match self {
            MethodSpec::Lqlr { .. } => "lqlr",
            MethodSpec::LqlrAdaptive { .. } => "lqlr_adaptive",
            MethodSpec::LrT => "lr_t",
            MethodSpec::Wilcoxon => "wilcoxon",
            MethodSpec::Sign => "sign",
            MethodSpec::Huber { .. } => "huber",
        }
    }

    /// Tuning parameter as printed in the `q` column.
    pub fn param(&self) -> String {
        match self {
            MethodSpec::Lqlr { q } => q.to_string(),
            MethodSpec::LqlrAdaptive { .. } => "adaptive".into(),
            MethodSpec::Huber { c_low, c_high } => format!("{c_low}:{c_high}"),
            _ => String::new(),
        }
    }

    /// How the method's null distribution is obtained.
    pub fn calibration(&self) -> &'static str {
        match self {
            MethodSpec::Lqlr { .. } | MethodSpec::LqlrAdaptive { .. } => "shift bootstrap",
            MethodSpec::LrT => "student t",
            MethodSpec::Wilcoxon => "exact signed-rank, normal approximation above 25",
            MethodSpec::Sign => "exact binomial",
            MethodSpec::Huber { .. } => "shift bootstrap centred at the MLE (this crate's calibration choice)",
        }
    }
}

fn default_theta_alt() -> f64 {
    DEFAULT_THETA_ALT
}
fn default_sigma() -> f64 {
    1.0
}
fn default_alpha() -> f64 {
    0.05
}
fn default_alternative() -> Alternative {
    Alternative::TwoSided
}
fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_bootstrap() -> usize {
    DEFAULT_BOOTSTRAP
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    /// Univariate family fitted by the likelihood-based tests.
    pub family: Family,
    pub theta_null: f64,
    #[serde(default = "default_theta_alt")]
    pub theta_alt: f64,
    /// Scale of the clean component, `σ` in `φ(x; θ, σ²)`.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
    pub contamination: Contamination,
    pub eps_grid: Vec<f64>,
    pub n: usize,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_replicates", alias = "M")]
    pub replicates: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_alternative")]
    pub alternative: Alternative,
    pub base_seed: u64,
    #[serde(default = "default_bootstrap", alias = "B")]
    pub bootstrap: usize,
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(LqError::InvalidParameter(m));
        if self.family.dim_x() != 1 {
            return Err(LqError::Unsupported("experiments need a univariate family".into()));
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(0.0..=0.5).contains(e)) {
            return bad(format!("eps_grid must be a non-empty subset of [0, 0.5], got {:?}", self.eps_grid));
        }
        if self.replicates < 100 {
            return bad(format!("replicates must be at least 100, got {}", self.replicates));
        }
        if self.theta_alt == self.theta_null {
            return bad("theta_alt must differ from theta_null".into());
        }
        if !(self.sigma > 0.0) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if self.n < 5 {
            return bad(format!("n must be at least 5, got {}", self.n));
        }
        if self.methods.is_empty() {
            return bad("no methods requested".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must be in (0, 1), got {}", self.alpha));
        }
        if self.bootstrap < 100 {
            return bad(format!("bootstrap must be at least 100, got {}", self.bootstrap));
        }
        if let Contamination::Normal { variance, .. } = self.contamination {
            if !(variance > 0.0) {
                return bad(format!("contamination variance must be positive, got {variance}"));
            }
        }
        for m in &self.methods {
            match m {
                MethodSpec::Lqlr { q } => {
                    LqParam::new(*q)?;
                }
                MethodSpec::Huber { c_low, c_high } if !(*c_low > 0.0 && c_low < c_high) => {
                    return bad(format!("huber thresholds need 0 < c_low < c_high, got {c_low}, {c_high}"));
                }
                _ => {}
            }
        }
        Ok(())
    }

    fn truth(&self, loc: f64) -> Vec<f64> {
        match self.family {
            Family::NormalLocationScale => vec![loc, self.sigma],
            _ => vec![loc],
        }
    }

    /// Gross-error model for one cell.
    pub fn model(&self, eps: f64, kind: Kind) -> Result<GrossErrorModel> {
        let loc = match kind {
            Kind::Size => self.theta_null,
            Kind::Power => self.theta_alt,
        };
        let clean = match self.family {
            Family::NormalKnownVariance { .. } => Family::normal_known_variance(self.sigma)?,
            ref f => f.clone(),
        };
        GrossErrorModel::new(clean, self.truth(loc), self.contamination.density(loc)?, eps)
    }

    fn hypothesis(&self) -> Result<HypothesisSpec> {
        HypothesisSpec::location(self.family.clone(), self.theta_null, self.alternative, self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Size,
    Power,
}

impl Kind {
    fn index(self) -> u64 {
        match self {
            Kind::Size => 0,
            Kind::Power => 1,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::Size => "size",
            Kind::Power => "power",
        })
    }
}

/// One line of the result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub method: String,
    pub q: String,
    pub eps: f64,
    pub kind: Kind,
    pub estimate: f64,
    pub stderr: f64,
    #[serde(rename = "M")]
    pub m: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellDiagnostics {
    pub method: String,
    pub q: String,
    pub eps: f64,
    pub kind: Kind,
    pub valid: usize,
    pub failures: usize,
    /// More than [`MAX_FAILURE_SHARE`] of the replicates failed.
    pub invalid: bool,
    pub calibration: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QhatSamples {
    pub eps: f64,
    pub kind: Kind,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub spec: ExperimentSpec,
    pub rows: Vec<ResultRow>,
    pub cells: Vec<CellDiagnostics>,
    /// Selected `q` per cell for adaptive LqLR runs.
    pub qhat: Vec<QhatSamples>,
}

pub const CSV_HEADER: &str = "method,q,eps,kind,estimate,stderr,M,seed";

impl ExperimentResult {
    pub fn row(&self, method: &str, q: &str, eps: f64, kind: Kind) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.method == method && r.q == q && r.eps == eps && r.kind == kind)
    }

    pub fn to_csv(&self) -> Result<String> {
        rows_to_csv(&self.rows)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| LqError::InvalidParameter(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| LqError::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("utf-8"))
}

pub fn rows_from_csv(text: &str) -> Result<Vec<ResultRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| LqError::InvalidParameter(e.to_string()))
}

/// Outcome of one method on one dataset: the decision and, for the
/// adaptive test, the selected `q`.
type Outcome = Result<(bool, Option<f64>)>;

fn run_method(method: &MethodSpec, data: &[f64], spec: &ExperimentSpec, hyp: &HypothesisSpec, boot_seed: u64) -> Outcome {
    let alt = spec.alternative;
    let alpha = spec.alpha;
    let mu0 = spec.theta_null;
    let decided = |r: TestResult| (r.reject, None);
    match method {
        MethodSpec::Lqlr { q } => {
            let opts = LqlrOptions { q: QChoice::Fixed(LqParam::new(*q)?), bootstrap: spec.bootstrap, seed: boot_seed };
            lqlr_test(data, hyp, &opts).map(decided)
        }
        MethodSpec::LqlrAdaptive { grid } => {
            let grid = grid.clone().unwrap_or_else(default_q_grid);
            let opts = LqlrOptions { q: QChoice::Adaptive { grid }, bootstrap: spec.bootstrap, seed: boot_seed };
            lqlr_test(data, hyp, &opts).map(|r| (r.reject, Some(r.q_used)))
        }
        MethodSpec::LrT => t_test(data, mu0, alt, alpha).map(decided),
        MethodSpec::Wilcoxon => wilcoxon_signed_rank(data, mu0, alt, alpha).map(decided),
        MethodSpec::Sign => sign_test(data, mu0, alt, alpha).map(decided),
        MethodSpec::Huber { c_low, c_high } => {
            let opts = HuberOptions { c_low: *c_low, c_high: *c_high, bootstrap: spec.bootstrap, seed: boot_seed };
            huber_censored_lr(data, hyp, &opts).map(decided)
        }
    }
}

/// Dataset for replicate `i` of a cell.
pub fn replicate_data(spec: &ExperimentSpec, eps_index: usize, kind: Kind, i: usize) -> Result<Vec<f64>> {
    let model = spec.model(spec.eps_grid[eps_index], kind)?;
    let mut rng = seed::rng_for(spec.base_seed, &[DATA_STREAM, eps_index as u64, kind.index(), i as u64]);
    Ok(model.sample_with(spec.n, &mut rng))
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let hyp = spec.hypothesis()?;
    let kinds = [Kind::Size, Kind::Power];
    let tasks: Vec<(usize, Kind, usize)> = (0..spec.eps_grid.len())
        .flat_map(|e| kinds.iter().flat_map(move |&k| (0..spec.replicates).map(move |i| (e, k, i))))
        .collect();

    let outcomes: Vec<Vec<Outcome>> = tasks
        .par_iter()
        .map(|&(e, kind, i)| {
            let data = match replicate_data(spec, e, kind, i) {
                Ok(d) => d,
                Err(err) => return spec.methods.iter().map(|_| Err(err.clone())).collect(),
            };
            let boot_seed = seed::derive(spec.base_seed, &[BOOT_STREAM, e as u64, kind.index(), i as u64]);
            spec.methods
                .iter()
                .map(|m| {
                    run_method(m, &data, spec, &hyp, boot_seed)
                })
                .collect()
        })
        .collect();

    let mut rows = Vec::new();
    let mut cells = Vec::new();
    let mut qhat = Vec::new();
    for (mi, method) in spec.methods.iter().enumerate() {
        for (e, &eps) in spec.eps_grid.iter().enumerate() {
            for &kind in &kinds {
                let mut rejections = 0usize;
                let mut valid = 0usize;
                let mut qs = Vec::new();
                for (t, _) in tasks.iter().enumerate().filter(|(_, t)| t.0 == e && t.1 == kind) {
                    if let Ok((reject, q)) = &outcomes[t][mi] {
                        valid += 1;
                        rejections += usize::from(*reject);
                        qs.extend(*q);
                    }
                }
                let failures = spec.replicates - valid;
                let estimate = if valid > 0 { rejections as f64 / valid as f64 } else { f64::NAN };
                let stderr = (estimate * (1.0 - estimate) / valid.max(1) as f64).sqrt();
                rows.push(ResultRow {
                    method: method.name().into(),
                    q: method.param(),
                    eps,
                    kind,
                    estimate,
                    stderr,
                    m: spec.replicates,
                    seed: spec.base_seed,
                });
                cells.push(CellDiagnostics {
                    method: method.name().into(),
                    q: method.param(),
                    eps,
                    kind,
                    valid,
                    failures,
                    invalid: failures as f64 > MAX_FAILURE_SHARE * spec.replicates as f64,
                    calibration: method.calibration().into(),
                });
                if matches!(method, MethodSpec::LqlrAdaptive { .. }) {
                    qhat.push(QhatSamples { eps, kind, values: qs });
                }
            }
        }
    }
    Ok(ExperimentResult { spec: spec.clone(), rows, cells, qhat })
}

/// Selected `q` on `spec.replicates` null datasets per contamination level,
/// without running the bootstrap. Replicates where selection fails are
/// skipped.
pub fn qhat_histogram(spec: &ExperimentSpec) -> Result<Vec<(f64, Vec<f64>)>> {
    spec.validate()?;
    let grid = spec
        .methods
        .iter()
        .find_map(|m| match m {
            MethodSpec::LqlrAdaptive { grid } => Some(grid.clone().unwrap_or_else(default_q_grid)),
            _ => None,
        })
        .ok_or_else(|| LqError::InvalidParameter("spec has no adaptive method".into()))?;
    let hyp = spec.hypothesis()?;
    spec.eps_grid
        .iter()
        .enumerate()
        .map(|(e, &eps)| {
            let values: Vec<f64> = (0..spec.replicates)
                .into_par_iter()
                .filter_map(|i| {
                    let data = replicate_data(spec, e, Kind::Size, i).ok()?;
                    select_q(&data, &hyp, &grid).ok().map(|s| s.q_hat)
                })
                .collect();
            Ok((eps, values))
        })
        .collect()
}

/// Median of a q̂ sample.
pub fn qhat_median(values: &[f64]) -> f64 {
    median(values)
}
