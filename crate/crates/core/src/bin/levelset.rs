//! Command-line front end: generate, sample, trace, recover, interpolate, and
//! run the seeded experiments.
//!
//! Exit codes: 0 success, 2 invalid arguments or malformed input, 3 an
//! `--assert`ed experiment outcome was not met, 1 any other failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;

use levelset::harness::{run_experiment, write_outputs, CurveModel, ExperimentConfig, Scenario};
use levelset::interpolant::{interpolate, select_anchors_with, AnchorOptions};
use levelset::recovery::{coefficient_match, recover_coefficients, RecoveryDocument};
use levelset::trigpoly::{random_polynomial, PolynomialDocument};
use levelset::zerosampler::{sample_zero_set, trace_zero_set, SamplerConfig};
use levelset::{Error, FrequencySet, Interpolant, SampleSet, TrigPolynomial};

#[derive(Parser)]
#[command(
    name = "levelset",
    version,
    about = "Zero level-sets of bandlimited trigonometric polynomials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a random polynomial as JSON.
    Gen(GenArgs),
    /// Draw random points on the zero set of a real polynomial.
    Sample(SampleArgs),
    /// Dense grid trace of the zero set (plot data).
    Trace(TraceArgs),
    /// Recover the polynomial from samples at a given bandwidth.
    Recover(RecoverArgs),
    /// Build or evaluate a kernel interpolant on a surface.
    #[command(subcommand)]
    Interp(InterpCommand),
    /// Run a seeded Monte Carlo experiment.
    Experiment(ExperimentArgs),
}

#[derive(Subcommand)]
enum InterpCommand {
    /// Select anchors on the surface and fit the interpolant of a function.
    Build(InterpBuildArgs),
    /// Evaluate an interpolant at the points of a CSV file.
    Eval(InterpEvalArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum GenModel {
    /// Real-valued, zero constant term.
    ZeroMean,
    /// Real-valued, vanishing at a uniformly random point.
    Anchored,
    /// Complex Gaussian coefficients (not real-valued).
    Complex,
}

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ModelArg {
    ZeroMean,
    Anchored,
}

impl From<ModelArg> for CurveModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::ZeroMean => CurveModel::ZeroMean,
            ModelArg::Anchored => CurveModel::Anchored,
        }
    }
}

#[derive(Args)]
struct OutArg {
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SamplerArgs {
    /// Root tolerance on |psi(x)|.
    #[arg(long = "tol-root", default_value_t = levelset::zerosampler::DEFAULT_ROOT_TOL)]
    tol_root: f64,
    /// Random slices tried per point before giving up.
    #[arg(long, default_value_t = levelset::zerosampler::DEFAULT_MAX_ATTEMPTS)]
    max_attempts: usize,
}

impl SamplerArgs {
    fn config(&self) -> SamplerConfig {
        SamplerConfig {
            tol: self.tol_root,
            max_attempts: self.max_attempts,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    dim: usize,
    /// Odd extents per axis, e.g. `3,3`.
    #[arg(long, value_delimiter = ',', required = true)]
    extents: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = GenModel::ZeroMean)]
    model: GenModel,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct SampleArgs {
    /// Polynomial JSON.
    #[arg(long)]
    poly: PathBuf,
    /// Number of points.
    #[arg(long, short = 'n')]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    poly: PathBuf,
    /// Grid nodes per axis.
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct RecoverArgs {
    /// Sample CSV.
    #[arg(long)]
    samples: PathBuf,
    /// Bandwidth extents, e.g. `3,3`.
    #[arg(long, value_delimiter = ',', required = true)]
    extents: Vec<usize>,
    /// Relative singular-value cutoff for the numerical rank.
    #[arg(long = "rank-tol", default_value_t = levelset::recovery::DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Ground-truth polynomial JSON; adds the coefficient match to the output.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct InterpBuildArgs {
    /// Real polynomial JSON whose zero set carries the anchors.
    #[arg(long)]
    curve: PathBuf,
    /// Function to interpolate (polynomial JSON); its support is the kernel bandwidth.
    #[arg(long)]
    function: Option<PathBuf>,
    /// Kernel bandwidth extents for a random function when `--function` is absent.
    #[arg(long, value_delimiter = ',')]
    gamma: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "pinv-tol", default_value_t = levelset::interpolant::DEFAULT_PINV_TOL)]
    pinv_tol: f64,
    #[arg(long = "rank-tol", default_value_t = levelset::recovery::DEFAULT_RANK_TOL)]
    rank_tol: f64,
    #[arg(long, default_value_t = levelset::interpolant::DEFAULT_ANCHOR_RETRIES)]
    retries: usize,
    /// Candidate pool size as a multiple of the anchor count.
    #[arg(long, default_value_t = levelset::interpolant::DEFAULT_POOL_FACTOR)]
    pool_factor: usize,
    #[command(flatten)]
    sampler: SamplerArgs,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct InterpEvalArgs {
    /// Interpolant JSON.
    #[arg(long)]
    interpolant: PathBuf,
    /// Point CSV in the sample-file layout (`x1,...,xn,component,residual`).
    #[arg(long)]
    points: PathBuf,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Args)]
struct ExperimentArgs {
    /// fig1, fig2, fig3, fig4, dim3_counts, rank_identity or custom.
    scenario: String,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "tol-root")]
    tol_root: Option<f64>,
    #[arg(long = "rank-tol")]
    rank_tol: Option<f64>,
    #[arg(long = "pinv-tol")]
    pinv_tol: Option<f64>,
    /// Success requires match >= 1 - this.
    #[arg(long)]
    match_tol: Option<f64>,
    /// Required success rate where recovery is predicted.
    #[arg(long)]
    rate_threshold: Option<f64>,
    /// On-surface interpolation error bound relative to the coefficient norm.
    #[arg(long)]
    interp_tol: Option<f64>,
    /// Dimension for `custom`.
    #[arg(long)]
    dim: Option<usize>,
    /// Bandwidth extents (per component), e.g. `3,3`.
    #[arg(long, value_delimiter = ',')]
    extents: Option<Vec<usize>>,
    /// Over-estimated bandwidth extents for interpolation and rank runs.
    #[arg(long, value_delimiter = ',')]
    gamma: Option<Vec<usize>>,
    /// Sample allocations: `;` separates allocations, `,` separates components,
    /// e.g. `8,16;16,8`.
    #[arg(long)]
    counts: Option<String>,
    #[arg(long, value_enum)]
    model: Option<ModelArg>,
    /// Directory for summary JSON and per-trial CSV files.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 3 unless every outcome matches the prediction.
    #[arg(long)]
    assert: bool,
    /// Record zero runtimes so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,
}

enum Failure {
    Lib(Error),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Lib(Error::Io(e))
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion(msg)) => {
            eprintln!("assertion failed: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidArgument(_) | Error::Format { .. } => 2,
                Error::Io(ref io) if io.kind() == io::ErrorKind::NotFound => 2,
                _ => 1,
            })
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Gen(a) => gen(a),
        Command::Sample(a) => sample(a),
        Command::Trace(a) => trace(a),
        Command::Recover(a) => recover(a),
        Command::Interp(InterpCommand::Build(a)) => interp_build(a),
        Command::Interp(InterpCommand::Eval(a)) => interp_eval(a),
        Command::Experiment(a) => experiment(a),
    }
}

fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| {
        Failure::Lib(Error::Io(io::Error::new(
            e.kind(),
            format!("{}: {e}", path.display()),
        )))
    })
}

fn with_path(path: &Path, e: Error) -> Failure {
    match e {
        Error::Format { location, message } => Failure::Lib(Error::Format {
            location: format!("{}: {location}", path.display()),
            message,
        }),
        other => Failure::Lib(other),
    }
}

fn read_polynomial(path: &Path) -> CliResult<TrigPolynomial> {
    let bytes = read_file(path)?;
    serde_json::from_slice(&bytes).map_err(|e| with_path(path, e.into()))
}

fn read_samples(path: &Path) -> CliResult<SampleSet> {
    let bytes = read_file(path)?;
    SampleSet::read_csv(bytes.as_slice()).map_err(|e| with_path(path, e))
}

fn emit(out: &OutArg, bytes: &[u8]) -> CliResult {
    match &out.out {
        Some(path) => fs::write(path, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn emit_json<T: Serialize>(out: &OutArg, value: &T) -> CliResult {
    let mut text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    text.push('\n');
    emit(out, text.as_bytes())
}

fn rect(dim: usize, extents: &[usize]) -> CliResult<FrequencySet> {
    if extents.len() != dim {
        return Err(Error::InvalidArgument(format!(
            "{} extents given for dimension {dim}",
            extents.len()
        ))
        .into());
    }
    Ok(FrequencySet::rect(dim, extents)?)
}

fn gen(a: GenArgs) -> CliResult {
    let support = rect(a.dim, &a.extents)?;
    let p = match a.model {
        GenModel::ZeroMean => CurveModel::ZeroMean.generate(&support, a.seed)?,
        GenModel::Anchored => CurveModel::Anchored.generate(&support, a.seed)?,
        GenModel::Complex => random_polynomial(&support, a.seed)?,
    };
    emit_json(
        &a.out,
        &PolynomialDocument::from_polynomial(&p, Some(a.seed)),
    )
}

fn sample(a: SampleArgs) -> CliResult {
    let p = read_polynomial(&a.poly)?;
    let set = sample_zero_set(&p, a.count, a.seed, &a.sampler.config())?;
    let mut buf = Vec::new();
    set.write_csv(&mut buf)?;
    emit(&a.out, &buf)
}

fn trace(a: TraceArgs) -> CliResult {
    let p = read_polynomial(&a.poly)?;
    let set = trace_zero_set(&p, a.resolution)?;
    let mut buf = Vec::new();
    set.write_csv(&mut buf)?;
    emit(&a.out, &buf)
}

fn recover(a: RecoverArgs) -> CliResult {
    let samples = read_samples(&a.samples)?;
    let bandwidth = rect(samples.dim(), &a.extents)?;
    let result = recover_coefficients(&samples, &bandwidth, a.rank_tol)?;
    let score = match &a.truth {
        Some(path) => Some(coefficient_match(
            &result.coefficients,
            &read_polynomial(path)?,
        )?),
        None => None,
    };
    emit_json(&a.out, &RecoveryDocument::new(&result, score))
}

fn interp_build(a: InterpBuildArgs) -> CliResult {
    let curve = read_polynomial(&a.curve)?;
    let f = match (&a.function, a.gamma.is_empty()) {
        (Some(path), true) => read_polynomial(path)?,
        (None, false) => random_polynomial(&rect(curve.dim(), &a.gamma)?, a.seed)?,
        _ => {
            return Err(
                Error::InvalidArgument("give exactly one of --function and --gamma".into()).into(),
            )
        }
    };
    let options = AnchorOptions {
        pool_factor: a.pool_factor,
        max_retries: a.retries,
        sampler: a.sampler.config(),
        rank_tol: a.rank_tol,
    };
    let anchors = select_anchors_with(&curve, f.support(), a.seed, &options)?;
    let itp = interpolate(&f, &anchors, a.pinv_tol)?;
    emit_json(&a.out, &itp)
}

fn interp_eval(a: InterpEvalArgs) -> CliResult {
    let bytes = read_file(&a.interpolant)?;
    let itp: Interpolant =
        serde_json::from_slice(&bytes).map_err(|e| with_path(&a.interpolant, e.into()))?;
    let points = read_samples(&a.points)?;
    let dim = itp.kernel_bandwidth().dim();
    if points.dim() != dim {
        return Err(Error::InvalidArgument(format!(
            "points have dimension {} but the interpolant has {dim}",
            points.dim()
        ))
        .into());
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<String> = (1..=dim).map(|i| format!("x{i}")).collect();
    header.extend(["re".to_string(), "im".to_string()]);
    w.write_record(&header).map_err(Error::from)?;
    for x in points.points() {
        let v: Complex64 = itp.eval(x)?;
        let mut row: Vec<String> = x.iter().map(|c| format!("{c:.16e}")).collect();
        row.push(format!("{:.16e}", v.re));
        row.push(format!("{:.16e}", v.im));
        w.write_record(&row).map_err(Error::from)?;
    }
    let buf = w
        .into_inner()
        .map_err(|e| Failure::Lib(Error::Io(e.into_error())))?;
    emit(&a.out, &buf)
}

fn parse_counts(s: &str) -> CliResult<Vec<Vec<usize>>> {
    s.split(';')
        .map(|alloc| {
            alloc
                .split(',')
                .map(|n| {
                    n.trim().parse::<usize>().map_err(|_| {
                        Failure::Lib(Error::InvalidArgument(format!(
                            "bad sample count {n:?} in --counts"
                        )))
                    })
                })
                .collect()
        })
        .collect()
}

fn experiment(a: ExperimentArgs) -> CliResult {
    let scenario: Scenario = a.scenario.parse()?;
    let mut cfg = ExperimentConfig::preset(scenario);
    if let Some(t) = a.trials {
        cfg.trials = t;
    }
    cfg.seed = a.seed;
    if let Some(v) = a.tol_root {
        cfg.root_tol = v;
    }
    if let Some(v) = a.rank_tol {
        cfg.rank_tol = v;
    }
    if let Some(v) = a.pinv_tol {
        cfg.pinv_tol = v;
    }
    if let Some(v) = a.match_tol {
        cfg.match_tol = v;
    }
    if let Some(v) = a.rate_threshold {
        cfg.rate_threshold = v;
    }
    if let Some(v) = a.interp_tol {
        cfg.interp_tol = v;
    }
    if let Some(e) = a.extents {
        cfg.dim = a.dim.unwrap_or(e.len());
        cfg.extents = e;
    } else if let Some(d) = a.dim {
        if d != cfg.dim {
            return Err(Error::InvalidArgument("--dim needs matching --extents".into()).into());
        }
    }
    if let Some(g) = a.gamma {
        cfg.gamma_extents = Some(g);
    }
    if let Some(c) = &a.counts {
        cfg.allocations = parse_counts(c)?;
    }
    if let Some(m) = a.model {
        cfg.curve_model = m.into();
    }
    cfg.record_timing = !a.no_timing;

    let summaries = run_experiment(&cfg)?;
    if let Some(dir) = &a.out {
        write_outputs(&cfg, &summaries, dir)?;
    }

    let mut stdout = io::stdout().lock();
    let mut unmet = Vec::new();
    for s in &summaries {
        let ok = s.meets_expectation(cfg.rate_threshold);
        writeln!(
            stdout,
            "{} {}: {}/{} succeeded (rate {:.2}, {} expected) {}",
            s.scenario,
            s.label,
            s.successes,
            s.trials,
            s.success_rate,
            if s.expected_success {
                "success"
            } else {
                "failure"
            },
            if ok {
                "as predicted"
            } else {
                "NOT as predicted"
            },
        )?;
        if let serde_json::Value::Object(extra) = &s.extra {
            let mut line = String::new();
            for (k, v) in extra {
                line.push_str(&format!(" {k}={v}"));
            }
            writeln!(stdout, " {}", line.trim_start())?;
        }
        if !ok {
            unmet.push(format!("{} {}", s.scenario, s.label));
        }
    }
    if a.assert && !unmet.is_empty() {
        return Err(Failure::Assertion(unmet.join(", ")));
    }
    Ok(())
}
