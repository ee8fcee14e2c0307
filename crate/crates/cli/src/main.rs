mod input;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DMatrix;
use serde::Serialize;

use lqlr::asymptotics::{eigenvalue_curves, ratio_surface, ExpectationMethod};
use lqlr::hypothesis::{
    bootstrap_critical_value, default_q_grid, empirical_quantile, huber_censored_lr, lqlr_test, select_q, sign_test,
    t_test, wilcoxon_signed_rank, Alternative, HuberOptions, HypothesisSpec, LqlrOptions, QChoice,
    DEFAULT_BOOTSTRAP,
};
use lqlr::simharness::{ExperimentSpec, ResultRow};
use lqlr::{Family, Gaussian, LqParam};

use input::{read_observations, List};

/// Seed used when `--seed` is not given.
const DEFAULT_SEED: u64 = 2024;

const SLEEP: [f64; 10] = [1.2, 2.4, 1.3, 1.3, 0.0, 1.0, 1.8, 0.8, 4.6, 1.4];

#[derive(Parser)]
#[command(name = "lqlr", version, about = "Lq-likelihood ratio tests and their calibration")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a one-sample location test on a column of observations.
    Test(TestArgs),
    /// Pick q from a grid by the estimated asymptotic variance.
    SelectQ(SelectQArgs),
    /// Bootstrap critical value of the LqLR statistic.
    CriticalValue(CriticalValueArgs),
    /// Run a Monte Carlo size/power experiment from a JSON spec.
    PowerCurve(PowerCurveArgs),
    /// Tabulate A/B ratios or distortion eigenvalues over (eps, q).
    Surface(SurfaceArgs),
    /// p-values on the bundled sleep data as the ninth value grows.
    DemoSleep(DemoSleepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Shared {
    /// Random seed [default: 2024]
    #[arg(long)]
    seed: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

impl Shared {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(DEFAULT_SEED)
    }
}

#[derive(Args)]
struct Location {
    /// Null value of the location.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu0: f64,
    /// Known standard deviation; the scale is estimated when omitted.
    #[arg(long)]
    sigma: Option<f64>,
}

impl Location {
    fn family(&self) -> Result<Family> {
        Ok(match self.sigma {
            Some(s) => Family::normal_known_variance(s)?,
            None => Family::NormalLocationScale,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum TestMethod {
    Lqlr,
    T,
    Wilcoxon,
    Sign,
    Huber,
}

#[derive(Clone, Copy, ValueEnum)]
enum Alt {
    Greater,
    Less,
    TwoSided,
}

impl From<Alt> for Alternative {
    fn from(a: Alt) -> Self {
        match a {
            Alt::Greater => Alternative::Greater,
            Alt::Less => Alternative::Less,
            Alt::TwoSided => Alternative::TwoSided,
        }
    }
}

fn parse_q(s: &str) -> std::result::Result<QChoice, String> {
    if s == "adaptive" {
        return Ok(QChoice::adaptive());
    }
    let v: f64 = s.parse().map_err(|_| format!("expected a number in (0, 1] or 'adaptive', got '{s}'"))?;
    LqParam::new(v).map(QChoice::Fixed).map_err(|e| e.to_string())
}

#[derive(Args)]
struct TestArgs {
    /// Observations, one per line; `-` reads stdin.
    input: PathBuf,
    #[arg(long, value_enum, default_value = "lqlr")]
    method: TestMethod,
    /// Fixed q or `adaptive`.
    #[arg(long, default_value = "adaptive", value_parser = parse_q)]
    q: QChoice,
    #[command(flatten)]
    location: Location,
    #[arg(long, value_enum, default_value = "two-sided")]
    alt: Alt,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    /// Exit with status 2 when the null is rejected.
    #[arg(long)]
    fail_on_reject: bool,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct SelectQArgs {
    input: PathBuf,
    /// Comma-separated q values [default: 0.5,0.55,...,1]
    #[arg(long, value_parser = List::parse)]
    grid: Option<List>,
    #[command(flatten)]
    location: Location,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct CriticalValueArgs {
    input: PathBuf,
    #[arg(long, default_value = "1", value_parser = parse_q)]
    q: QChoice,
    #[command(flatten)]
    location: Location,
    #[arg(long, value_enum, default_value = "two-sided")]
    alt: Alt,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP)]
    bootstrap: usize,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct PowerCurveArgs {
    /// Experiment spec (JSON).
    spec: PathBuf,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Clone, Copy, ValueEnum)]
enum SurfaceKind {
    Ratio,
    Eigen,
}

#[derive(Args)]
struct SurfaceArgs {
    #[arg(long, value_enum, default_value = "ratio")]
    kind: SurfaceKind,
    #[arg(long, value_parser = List::parse, default_value = "0,0.05,0.1,0.2")]
    eps_grid: List,
    /// [default: 0.5,0.55,...,1]
    #[arg(long, value_parser = List::parse)]
    q_grid: Option<List>,
    /// Standard deviation of the clean model (ratio).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Variance of the contaminating normal (ratio).
    #[arg(long, default_value_t = 10.0)]
    g_variance: f64,
    /// Row-major covariance of the clean model (eigen).
    #[arg(long, value_parser = List::parse, default_value = "1,0.5,0.5,2")]
    cov: List,
    /// Contamination covariance as a multiple of the clean one (eigen).
    #[arg(long, default_value_t = 30.0)]
    g_scale: f64,
    /// Monte Carlo draws for the expectations (eigen).
    #[arg(long, default_value_t = 1_000_000)]
    draws: usize,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Args)]
struct DemoSleepArgs {
    /// Values for the ninth observation, within [4.6, 16].
    #[arg(long, value_parser = List::parse, default_value = "4.6,6,8,10,12,14,16")]
    delta9: List,
    #[arg(long, default_value_t = 0.85)]
    q: f64,
    #[arg(long, default_value_t = 2000)]
    bootstrap: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[command(flatten)]
    shared: Shared,
}

#[derive(Debug, Serialize)]
struct TestOutput {
    statistic: f64,
    q: Option<f64>,
    critical_value: Option<f64>,
    p_value: f64,
    reject: bool,
    method: &'static str,
    seed: Option<u64>,
    n: usize,
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

fn to_json<T: Serialize + ?Sized>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn emit<T: Serialize>(shared: &Shared, default: Format, rows: &[T]) -> Result<()> {
    let text = match shared.format.unwrap_or(default) {
        Format::Csv => to_csv(rows)?,
        Format::Json => to_json(rows)?,
    };
    write_out(shared.out.as_deref(), &text)
}

/// Returns whether the null was rejected.
fn cmd_test(args: &TestArgs) -> Result<bool> {
    let data = read_observations(&args.input)?;
    let alt = Alternative::from(args.alt);
    let seed = args.shared.seed();
    let (r, method, seed) = match args.method {
        TestMethod::Lqlr => {
            let spec = HypothesisSpec::location(args.location.family()?, args.location.mu0, alt, args.alpha)?;
            let opts = LqlrOptions { q: args.q.clone(), bootstrap: args.bootstrap, seed };
            (lqlr_test(&data, &spec, &opts)?, "lqlr", Some(seed))
        }
        TestMethod::Huber => {
            let spec = HypothesisSpec::location(args.location.family()?, args.location.mu0, alt, args.alpha)?;
            let opts = HuberOptions { bootstrap: args.bootstrap, seed, ..HuberOptions::default() };
            (huber_censored_lr(&data, &spec, &opts)?, "huber", Some(seed))
        }
        TestMethod::T => (t_test(&data, args.location.mu0, alt, args.alpha)?, "t", None),
        TestMethod::Wilcoxon => (wilcoxon_signed_rank(&data, args.location.mu0, alt, args.alpha)?, "wilcoxon", None),
        TestMethod::Sign => (sign_test(&data, args.location.mu0, alt, args.alpha)?, "sign", None),
    };
    let out = TestOutput {
        statistic: r.statistic,
        q: matches!(args.method, TestMethod::Lqlr).then_some(r.q_used),
        critical_value: r.critical_value,
        p_value: r.p_value,
        reject: r.reject,
        method,
        seed,
        n: r.n,
    };
    let text = match args.shared.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&out)?,
        Format::Csv => to_csv(&[&out])?,
    };
    write_out(args.shared.out.as_deref(), &text)?;
    Ok(r.reject)
}

#[derive(Serialize)]
struct CurveRow {
    q: f64,
    objective: Option<f64>,
    selected: bool,
}

fn cmd_select_q(args: &SelectQArgs) -> Result<()> {
    let data = read_observations(&args.input)?;
    let spec = HypothesisSpec::location(args.location.family()?, args.location.mu0, Alternative::TwoSided, 0.05)?;
    let grid = args.grid.clone().map_or_else(default_q_grid, |g| g.0);
    let sel = select_q(&data, &spec, &grid)?;
    let rows: Vec<CurveRow> =
        sel.curve.iter().map(|&(q, objective)| CurveRow { q, objective, selected: q == sel.q_hat }).collect();
    match args.shared.format.unwrap_or(Format::Csv) {
        Format::Csv => write_out(args.shared.out.as_deref(), &to_csv(&rows)?),
        Format::Json => {
            let body = serde_json::json!({ "q_hat": sel.q_hat, "curve": rows });
            write_out(args.shared.out.as_deref(), &to_json(&body)?)
        }
    }
}

#[derive(Serialize)]
struct CriticalValueOutput {
    critical_value: f64,
    q: f64,
    alpha: f64,
    bootstrap: usize,
    seed: u64,
    n: usize,
    redraws: usize,
}

fn cmd_critical_value(args: &CriticalValueArgs) -> Result<()> {
    let data = read_observations(&args.input)?;
    let spec =
        HypothesisSpec::location(args.location.family()?, args.location.mu0, args.alt.into(), args.alpha)?;
    let q = match &args.q {
        QChoice::Fixed(q) => *q,
        QChoice::Adaptive { grid } => LqParam::new(select_q(&data, &spec, grid)?.q_hat)?,
    };
    let seed = args.shared.seed();
    let boot = bootstrap_critical_value(&data, &spec, q, args.bootstrap, seed)?;
    let out = CriticalValueOutput {
        critical_value: empirical_quantile(boot.oriented_draws(), 1.0 - args.alpha),
        q: q.value(),
        alpha: args.alpha,
        bootstrap: args.bootstrap,
        seed,
        n: data.len(),
        redraws: boot.redraws,
    };
    emit(&args.shared, Format::Json, &[out])
}

fn load_experiment(path: &Path) -> Result<ExperimentSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de)
        .map_err(|e| anyhow::anyhow!("invalid spec at '{}': {}", e.path(), e.inner()))?;
    spec.validate().context("invalid spec")?;
    Ok(spec)
}

fn summary_table(rows: &[ResultRow]) -> String {
    let mut s = format!("{:<16}{:>10}{:>7}{:>7}{:>10}{:>9}\n", "method", "q", "eps", "kind", "estimate", "stderr");
    for r in rows {
        s += &format!(
            "{:<16}{:>10}{:>7}{:>7}{:>10.4}{:>9.4}\n",
            r.method,
            r.q,
            r.eps,
            r.kind.to_string(),
            r.estimate,
            r.stderr
        );
    }
    s
}

fn cmd_power_curve(args: &PowerCurveArgs) -> Result<()> {
    let mut spec = load_experiment(&args.spec)?;
    if let Some(seed) = args.shared.seed {
        spec.base_seed = seed;
    }
    let result = lqlr::simharness::run_experiment(&spec)?;
    let format = args.shared.format.unwrap_or(Format::Csv);
    let body = match format {
        Format::Csv => result.to_csv()?,
        Format::Json => result.to_json() + "\n",
    };
    match &args.shared.out {
        Some(path) => {
            write_out(Some(path), &body)?;
            if format == Format::Csv {
                let mirror = path.with_extension("json");
                write_out(Some(&mirror), &(result.to_json() + "\n"))?;
            }
            print!("{}", summary_table(&result.rows));
            Ok(())
        }
        None => write_out(None, &body),
    }
}

fn cmd_surface(args: &SurfaceArgs) -> Result<()> {
    let q_grid = args.q_grid.clone().map_or_else(default_q_grid, |g| g.0);
    match args.kind {
        SurfaceKind::Ratio => {
            let fam = Family::normal_known_variance(args.sigma)?;
            let g = Gaussian::univariate(0.0, args.g_variance)?;
            let rows = ratio_surface(&fam, &[0.0], &g, &args.eps_grid.0, &q_grid)?;
            emit(&args.shared, Format::Csv, &rows)
        }
        SurfaceKind::Eigen => {
            let d = (args.cov.0.len() as f64).sqrt().round() as usize;
            if d == 0 || d * d != args.cov.0.len() {
                bail!("--cov needs d*d values for a square matrix, got {}", args.cov.0.len());
            }
            let cov = DMatrix::from_row_slice(d, d, &args.cov.0);
            let fam = Family::mvn_known_covariance(cov.clone())?;
            let g = Gaussian::new(vec![0.0; d], cov * args.g_scale)?;
            let method = ExpectationMethod::MonteCarlo { draws: args.draws, seed: args.shared.seed() };
            let rows = eigenvalue_curves(&fam, &vec![0.0; d], &g, d, &args.eps_grid.0, &q_grid, method)?;
            emit(&args.shared, Format::Csv, &rows)
        }
    }
}

#[derive(Serialize)]
struct SleepRow {
    delta9: f64,
    p_t: f64,
    p_lqlr: f64,
}

fn cmd_demo_sleep(args: &DemoSleepArgs) -> Result<()> {
    if let Some(bad) = args.delta9.0.iter().find(|&&v| !(4.6..=16.0).contains(&v)) {
        bail!("delta9 value {bad} outside [4.6, 16]");
    }
    let spec = HypothesisSpec::location(Family::NormalLocationScale, 0.0, Alternative::Greater, args.alpha)?;
    let opts = LqlrOptions { q: QChoice::Fixed(LqParam::new(args.q)?), bootstrap: args.bootstrap, seed: args.shared.seed() };
    let rows = args
        .delta9
        .0
        .iter()
        .map(|&d9| {
            let mut data = SLEEP;
            data[8] = d9;
            Ok(SleepRow {
                delta9: d9,
                p_t: t_test(&data, 0.0, Alternative::Greater, args.alpha)?.p_value,
                p_lqlr: lqlr_test(&data, &spec, &opts)?.p_value,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    emit(&args.shared, Format::Csv, &rows)
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Test(a) => {
            let reject = cmd_test(&a)?;
            return Ok(if reject && a.fail_on_reject { ExitCode::from(2) } else { ExitCode::SUCCESS });
        }
        Command::SelectQ(a) => cmd_select_q(&a)?,
        Command::CriticalValue(a) => cmd_critical_value(&a)?,
        Command::PowerCurve(a) => cmd_power_curve(&a)?,
        Command::Surface(a) => cmd_surface(&a)?,
        Command::DemoSleep(a) => cmd_demo_sleep(&a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
