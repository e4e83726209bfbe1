//! The `osinfluence` command-line tool.
//!
//! Exit codes: 0 success, 1 internal failure, 2 invalid spec or usage,
//! 3 method incompatible with the function class, 4 tainted Monte-Carlo sample,
//! 5 estimator disagreement in `crosscheck`, 6 numerical failure.

pub mod report;
pub mod spec_file;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::function::FunctionSpec;
use crate::lovasz::{equal_influence_class, mobius, symmetric_part, SetFunction};
use crate::montecarlo::{influence_mc, z_score, EstimatorKind, IntegrationEstimate};
use crate::projection::{influence_profile, project, Method, MethodTag, DEFAULT_SAMPLES, DEFAULT_SEED};
use crate::rational::format_rational;
use report::{
    ApproximationReport, CrosscheckReport, EstimateReport, IndexResult, LovaszReport, PairReport, ReferenceReport,
    ReportDocument, SymmetricPartReport, ValueReport,
};
use spec_file::FunctionSpecFile;

/// Environment variable holding the default Monte-Carlo seed.
pub const SEED_ENV: &str = "OSINFLUENCE_SEED";

/// `|z|` above this counts as a disagreement.
pub const Z_THRESHOLD: f64 = 3.0;

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(i32)]
pub enum ExitStatus {
    Success = 0,
    Internal = 1,
    InvalidInput = 2,
    IncompatibleMethod = 3,
    TaintedSample = 4,
    Disagreement = 5,
    Numerical = 6,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }

    pub fn for_error(e: &Error) -> Self {
        match e {
            Error::Domain(_) => ExitStatus::InvalidInput,
            Error::Configuration(_) => ExitStatus::IncompatibleMethod,
            Error::TaintedSample { .. } => ExitStatus::TaintedSample,
            Error::DegenerateVariance(_) | Error::Quadrature { .. } | Error::BranchAmbiguity(_) => {
                ExitStatus::Numerical
            }
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "osinfluence", version, about = "Influence of the k-th smallest variable and best L-statistic approximations")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Influence indices I(f, k).
    Influence(InfluenceArgs),
    /// Best shifted L-statistic approximation, R² and normalized indices.
    Approx(ApproxArgs),
    /// Set-function diagnostics of a Lovász extension.
    Lovasz(LovaszArgs),
    /// Runs several estimators of I(f, k) and compares them pairwise.
    Crosscheck(CrosscheckArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Auto,
    Exact,
    ClosedForm,
    Mc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Args, Debug, Clone)]
pub struct SamplingArgs {
    /// Monte-Carlo sample count.
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    pub samples: u64,
    /// Monte-Carlo seed.
    #[arg(long, env = SEED_ENV, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct InfluenceArgs {
    /// Function description file (JSON).
    pub spec: PathBuf,
    /// Report only this k.
    #[arg(long, conflicts_with = "all")]
    pub k: Option<usize>,
    /// Report every k (the default).
    #[arg(long)]
    pub all: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    /// Estimator used by the Monte-Carlo method.
    #[arg(long, default_value = "covariance")]
    pub estimator: EstimatorKind,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct ApproxArgs {
    pub spec: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct LovaszArgs {
    pub spec: PathBuf,
    /// Test whether all k have the same influence, naming the first violated level.
    #[arg(long)]
    pub diagnose_equal_influence: bool,
    /// Report the Möbius transform.
    #[arg(long)]
    pub mobius: bool,
    /// Report the symmetric part v(∅) + sum_k I(f, k) x_(k).
    #[arg(long)]
    pub symmetric_part: bool,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct CrosscheckArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Comma-separated estimators; by default every estimator the function supports.
    #[arg(long, value_delimiter = ',')]
    pub estimators: Option<Vec<EstimatorKind>>,
    #[command(flatten)]
    pub sampling: SamplingArgs,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    pub format: Format,
}

/// Outcome of one invocation: the report (if any), the exit status and an error message.
pub struct Outcome {
    pub report: Option<ReportDocument>,
    pub status: ExitStatus,
    pub message: Option<String>,
}

impl Outcome {
    fn failure(e: &Error) -> Self {
        Outcome { report: None, status: ExitStatus::for_error(e), message: Some(e.to_string()) }
    }

    fn invalid(msg: String) -> Self {
        Outcome { report: None, status: ExitStatus::InvalidInput, message: Some(msg) }
    }
}

struct LoadedSpec {
    raw: serde_json::Value,
    function: FunctionSpec,
}

fn load_spec(path: &PathBuf) -> Result<LoadedSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file = FunctionSpecFile::parse(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    let function = file.build().map_err(|e| format!("{}: {e}", path.display()))?;
    let raw = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(LoadedSpec { raw, function })
}

fn to_method(arg: MethodArg, sampling: &SamplingArgs) -> Method {
    match arg {
        MethodArg::Auto => Method::Auto { samples: sampling.samples, seed: sampling.seed },
        MethodArg::Exact => Method::Exact,
        MethodArg::ClosedForm => Method::ClosedForm,
        MethodArg::Mc => Method::MonteCarlo { samples: sampling.samples, seed: sampling.seed },
    }
}

fn set_provenance(doc: &mut ReportDocument, method: MethodTag, samples: Option<u64>, seed: Option<u64>) {
    doc.method = Some(method.name().into());
    doc.samples = samples;
    doc.seed = seed;
}

fn influence(args: &InfluenceArgs) -> Outcome {
    let spec = match load_spec(&args.spec) {
        Ok(s) => s,
        Err(m) => return Outcome::invalid(m),
    };
    let f = &spec.function;
    let n = f.arity();
    let ks: Vec<usize> = match args.k {
        Some(k) if k == 0 || k > n => return Outcome::invalid(format!("--k {k} outside [1, {n}]")),
        Some(k) => vec![k],
        None => (1..=n).collect(),
    };
    let method = match to_method(args.method, &args.sampling).resolve(f) {
        Ok(m) => m,
        Err(e) => return Outcome::failure(&e),
    };
    let mut doc = ReportDocument::new("influence", spec.raw, n);
    if let (Method::MonteCarlo { samples, seed }, true) = (method, args.estimator != EstimatorKind::Covariance) {
        let evaluator = f.evaluator();
        for &k in &ks {
            match influence_mc(evaluator.as_ref(), k, samples, seed, args.estimator) {
                Ok(est) => doc.results.push(estimate_row(k, &est)),
                Err(e) => return Outcome::failure(&e),
            }
        }
        set_provenance(&mut doc, MethodTag::MonteCarlo, Some(samples), Some(seed));
        doc.method = Some(format!("monte-carlo/{}", args.estimator.name()));
        return Outcome { report: Some(doc), status: ExitStatus::Success, message: None };
    }
    let profile = match influence_profile(f, method) {
        Ok(p) => p,
        Err(e) => return Outcome::failure(&e),
    };
    set_provenance(&mut doc, profile.method, profile.samples, profile.seed);
    for &k in &ks {
        let q = &profile.indices[k - 1];
        doc.results.push(IndexResult {
            k,
            method: profile.method.name().into(),
            value: q.value,
            rational: q.exact.as_ref().map(format_rational),
            se: q.std_error,
            samples: profile.samples,
            seed: profile.seed,
        });
    }
    Outcome { report: Some(doc), status: ExitStatus::Success, message: None }
}

fn estimate_row(k: usize, est: &IntegrationEstimate) -> IndexResult {
    IndexResult {
        k,
        method: format!("monte-carlo/{}", est.estimator.name()),
        value: est.value,
        rational: None,
        se: Some(est.std_error),
        samples: Some(est.samples),
        seed: Some(est.seed),
    }
}

fn approx(args: &ApproxArgs) -> Outcome {
    let spec = match load_spec(&args.spec) {
        Ok(s) => s,
        Err(m) => return Outcome::invalid(m),
    };
    let f = &spec.function;
    let n = f.arity();
    let projection = match project(f, to_method(args.method, &args.sampling)) {
        Ok(p) => p,
        Err(e) => return Outcome::failure(&e),
    };
    let mut doc = ReportDocument::new("approx", spec.raw, n);
    let profile = &projection.profile;
    set_provenance(&mut doc, profile.method, profile.samples, profile.seed);
    for (i, q) in profile.indices.iter().enumerate() {
        doc.results.push(IndexResult {
            k: i + 1,
            method: profile.method.name().into(),
            value: q.value,
            rational: q.exact.as_ref().map(format_rational),
            se: q.std_error,
            samples: profile.samples,
            seed: profile.seed,
        });
    }
    let mut report = ApproximationReport {
        coefficients: projection.coefficients().iter().map(ValueReport::from).collect(),
        mean: ValueReport::from(&profile.mean),
        slopes: profile.indices.iter().map(ValueReport::from).collect(),
        r_squared: None,
        residual_norm_sq: projection.residual_norm_sq().as_ref().map(ValueReport::from),
        normalized_indices: None,
    };
    match projection.r_squared() {
        Ok(r2) => report.r_squared = Some(ValueReport::from(&r2)),
        Err(Error::DegenerateVariance(m)) => doc.warnings.push(format!("R² and r(f,k) undefined: {m}")),
        Err(e) => doc.warnings.push(format!("R² unavailable: {e}")),
    }
    if report.r_squared.is_some() {
        let rs: Result<Vec<_>, _> = (1..=n).map(|k| projection.normalized_index(k)).collect();
        match rs {
            Ok(rs) => report.normalized_indices = Some(rs.iter().map(ValueReport::from).collect()),
            Err(e) => doc.warnings.push(format!("r(f,k) unavailable: {e}")),
        }
    }
    doc.approximation = Some(report);
    Outcome { report: Some(doc), status: ExitStatus::Success, message: None }
}

fn lovasz(args: &LovaszArgs) -> Outcome {
    let spec = match load_spec(&args.spec) {
        Ok(s) => s,
        Err(m) => return Outcome::invalid(m),
    };
    let v: &SetFunction = match &spec.function {
        FunctionSpec::SetFunction(v) => v,
        other => {
            return Outcome {
                report: None,
                status: ExitStatus::IncompatibleMethod,
                message: Some(format!("lovasz needs a set-function spec, got {}", other.class_name())),
            }
        }
    };
    let n = v.arity();
    let part = symmetric_part(v);
    let mut doc = ReportDocument::new("lovasz", spec.raw.clone(), n);
    doc.method = Some(MethodTag::Exact.name().into());
    for (i, s) in part.slopes.iter().enumerate() {
        doc.results.push(IndexResult {
            k: i + 1,
            method: MethodTag::Exact.name().into(),
            value: crate::rational::to_f64(s),
            rational: Some(format_rational(s)),
            se: None,
            samples: None,
            seed: None,
        });
    }
    doc.lovasz = Some(LovaszReport {
        profile: part.slopes.iter().map(format_rational).collect(),
        mobius: args.mobius.then(|| mobius(v).values().iter().map(format_rational).collect()),
        symmetric_part: args.symmetric_part.then(|| SymmetricPartReport {
            constant: format_rational(&part.constant),
            slopes: part.slopes.iter().map(format_rational).collect(),
        }),
        equal_influence: args.diagnose_equal_influence.then(|| equal_influence_class(v)),
        choquet_capacity: v.is_choquet_capacity(),
    });
    Outcome { report: Some(doc), status: ExitStatus::Success, message: None }
}

fn default_estimators(f: &FunctionSpec) -> Vec<EstimatorKind> {
    let mut list = vec![EstimatorKind::Covariance];
    if f.evaluator().has_slot_derivative() {
        list.push(EstimatorKind::Derivative);
    }
    list.push(EstimatorKind::DiffQuotientUniform);
    list.push(EstimatorKind::DiffQuotientTriangular);
    list
}

fn crosscheck(args: &CrosscheckArgs) -> Outcome {
    let spec = match load_spec(&args.spec) {
        Ok(s) => s,
        Err(m) => return Outcome::invalid(m),
    };
    let f = &spec.function;
    let n = f.arity();
    let k = args.k;
    if k == 0 || k > n {
        return Outcome::invalid(format!("--k {k} outside [1, {n}]"));
    }
    let estimators = args.estimators.clone().unwrap_or_else(|| default_estimators(f));
    let evaluator = f.evaluator();
    let (samples, seed) = (args.sampling.samples, args.sampling.seed);
    let mut estimates = Vec::new();
    for kind in &estimators {
        match influence_mc(evaluator.as_ref(), k, samples, seed, *kind) {
            Ok(e) => estimates.push(e),
            Err(e) => return Outcome::failure(&e),
        }
    }
    let reference = match (Method::Auto { samples, seed }).resolve(f) {
        Ok(m @ (Method::Exact | Method::ClosedForm)) => match influence_profile(f, m) {
            Ok(p) => Some(ReferenceReport {
                method: p.method.name().into(),
                value: p.indices[k - 1].value,
                rational: p.indices[k - 1].exact.as_ref().map(format_rational),
            }),
            Err(e) => return Outcome::failure(&e),
        },
        _ => None,
    };
    let finite = |z: f64| z.is_finite().then_some(z);
    let mut pairs = Vec::new();
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            pairs.push(PairReport { a: a.estimator.name().into(), b: b.estimator.name().into(), z: finite(a.z_score(b)) });
        }
        if let Some(r) = &reference {
            pairs.push(PairReport {
                a: a.estimator.name().into(),
                b: r.method.clone(),
                z: finite(z_score(a.value - r.value, a.std_error)),
            });
        }
    }
    let agree = pairs.iter().all(|p| p.z.is_some_and(|z| z.abs() <= Z_THRESHOLD));
    let mut doc = ReportDocument::new("crosscheck", spec.raw, n);
    set_provenance(&mut doc, MethodTag::MonteCarlo, Some(samples), Some(seed));
    doc.results = estimates.iter().map(|e| estimate_row(k, e)).collect();
    doc.crosscheck = Some(CrosscheckReport {
        k,
        reference,
        estimates: estimates
            .iter()
            .map(|e| EstimateReport {
                estimator: e.estimator.name().into(),
                value: e.value,
                se: e.std_error,
                samples: e.samples,
                seed: e.seed,
            })
            .collect(),
        pairs,
        threshold: Z_THRESHOLD,
        agree,
    });
    let status = if agree { ExitStatus::Success } else { ExitStatus::Disagreement };
    let message = (!agree).then(|| format!("estimators disagree: some |z| > {Z_THRESHOLD}"));
    Outcome { report: Some(doc), status, message }
}

fn format_of(command: &Command) -> Format {
    match command {
        Command::Influence(a) => a.format,
        Command::Approx(a) => a.format,
        Command::Lovasz(a) => a.format,
        Command::Crosscheck(a) => a.format,
    }
}

/// Runs a parsed command.
pub fn execute(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Influence(a) => influence(a),
        Command::Approx(a) => approx(a),
        Command::Lovasz(a) => lovasz(a),
        Command::Crosscheck(a) => crosscheck(a),
    }
}

/// Renders a report in the requested format.
pub fn render(report: &ReportDocument, format: Format) -> String {
    match format {
        Format::Table => report.to_table(),
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    }
}

/// Entry point shared by the binary and the tests; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => ExitStatus::InvalidInput.code(),
            };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    let outcome = std::panic::catch_unwind(|| execute(&cli)).unwrap_or_else(|_| Outcome {
        report: None,
        status: ExitStatus::Internal,
        message: Some("internal error".into()),
    });
    if let Some(report) = &outcome.report {
        if stdout.write_all(render(report, format_of(&cli.command)).as_bytes()).is_err() {
            return ExitStatus::Internal.code();
        }
    }
    if let Some(m) = &outcome.message {
        let _ = writeln!(stderr, "error: {m}");
    }
    outcome.status.code()
}
