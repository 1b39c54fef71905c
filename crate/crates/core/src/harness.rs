//! Seeded Monte Carlo experiments.
//!
//! Every trial `t` runs with seed `seed + t` and draws everything it needs
//! (curves, samples, test functions) from seeds derived from that value, so a
//! trial is reproducible on its own and independent of the others.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::freqset::FrequencySet;
use crate::interpolant::{anchor_count, interpolate, select_anchors_with, AnchorOptions};
use crate::recovery::{
    coefficient_match, numerical_rank, rank_identity_check, recover_coefficients,
};
use crate::trigpoly::{
    feature_matrix, random_polynomial, random_real_polynomial, random_zero_mean_polynomial,
    TrigPolynomial,
};
use crate::zerosampler::{derive_seed, sample_union, sample_zero_set, SampleSet, SamplerConfig};

const TAG_CURVE: u64 = 0x100;
const TAG_SAMPLES: u64 = 0x200;
const TAG_FUNCTION: u64 = 0x300;
const TAG_ANCHORS: u64 = 0x400;
const TAG_TEST_POINTS: u64 = 0x500;
const TAG_OFF_SURFACE: u64 = 0x600;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Dim3Counts,
    RankIdentity,
    Custom,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig1 => "fig1",
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Dim3Counts => "dim3_counts",
            Scenario::RankIdentity => "rank_identity",
            Scenario::Custom => "custom",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "fig1" => Scenario::Fig1,
            "fig2" => Scenario::Fig2,
            "fig3" => Scenario::Fig3,
            "fig4" => Scenario::Fig4,
            "dim3_counts" | "dim3-counts" => Scenario::Dim3Counts,
            "rank_identity" | "rank-identity" => Scenario::RankIdentity,
            "custom" => Scenario::Custom,
            other => return Err(Error::invalid(format!("unknown scenario {other:?}"))),
        })
    }
}

/// How random surfaces are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveModel {
    /// Conjugate-symmetric Gaussian coefficients with the constant term removed.
    ZeroMean,
    /// Gaussian coefficients with the constant term shifted so the polynomial
    /// vanishes at a uniformly random point.
    Anchored,
}

impl CurveModel {
    pub fn generate(self, bandwidth: &FrequencySet, seed: u64) -> Result<TrigPolynomial> {
        match self {
            CurveModel::ZeroMean => random_zero_mean_polynomial(bandwidth, seed),
            CurveModel::Anchored => random_real_polynomial(bandwidth, seed).map(|a| a.polynomial),
        }
    }
}

impl FromStr for CurveModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero-mean" => Ok(CurveModel::ZeroMean),
            "anchored" => Ok(CurveModel::Anchored),
            other => Err(Error::invalid(format!("unknown curve model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub dim: usize,
    /// Bandwidth extents of the surface (of each component, for unions).
    pub extents: Vec<usize>,
    /// Over-estimated bandwidth for `fig4` and `rank_identity`.
    pub gamma_extents: Option<Vec<usize>>,
    /// Each entry lists per-component sample counts; one summary per entry.
    pub allocations: Vec<Vec<usize>>,
    pub trials: usize,
    pub seed: u64,
    pub root_tol: f64,
    pub max_attempts: usize,
    pub rank_tol: f64,
    pub pinv_tol: f64,
    /// Recovery counts as successful when unique and match >= 1 - this.
    pub match_tol: f64,
    /// Success rate required where the sampling conditions hold; where they
    /// fail, the rate must be at most `1 - rate_threshold`.
    pub rate_threshold: f64,
    /// On-surface interpolation error bound relative to the coefficient norm.
    pub interp_tol: f64,
    pub test_points: usize,
    pub anchor_pool_factor: usize,
    pub anchor_retries: usize,
    pub curve_model: CurveModel,
    /// When false, runtimes are written as zero so outputs are byte-identical.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn preset(scenario: Scenario) -> Self {
        let base = ExperimentConfig {
            scenario,
            dim: 2,
            extents: vec![3, 3],
            gamma_extents: None,
            allocations: vec![vec![8]],
            trials: 100,
            seed: 0,
            root_tol: crate::zerosampler::DEFAULT_ROOT_TOL,
            max_attempts: crate::zerosampler::DEFAULT_MAX_ATTEMPTS,
            rank_tol: crate::recovery::DEFAULT_RANK_TOL,
            pinv_tol: crate::interpolant::DEFAULT_PINV_TOL,
            match_tol: 1e-8,
            rate_threshold: 0.95,
            interp_tol: 1e-6,
            test_points: 200,
            anchor_pool_factor: crate::interpolant::DEFAULT_POOL_FACTOR,
            anchor_retries: crate::interpolant::DEFAULT_ANCHOR_RETRIES,
            curve_model: CurveModel::ZeroMean,
            record_timing: true,
        };
        match scenario {
            Scenario::Fig1 | Scenario::Custom => ExperimentConfig {
                allocations: vec![vec![7], vec![8]],
                ..base
            },
            Scenario::Fig2 => ExperimentConfig {
                dim: 3,
                extents: vec![3, 3, 3],
                allocations: vec![vec![25], vec![26]],
                ..base
            },
            Scenario::Fig3 => ExperimentConfig {
                allocations: vec![
                    vec![7, 17],
                    vec![8, 16],
                    vec![17, 7],
                    vec![16, 8],
                    vec![8, 8],
                ],
                ..base
            },
            Scenario::Fig4 => ExperimentConfig {
                gamma_extents: Some(vec![13, 13]),
                allocations: vec![],
                ..base
            },
            Scenario::Dim3Counts => ExperimentConfig {
                dim: 3,
                extents: vec![5, 5, 5],
                allocations: vec![vec![124]],
                ..base
            },
            Scenario::RankIdentity => ExperimentConfig {
                gamma_extents: Some(vec![13, 13]),
                allocations: vec![vec![60]],
                ..base
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials must be at least 1"));
        }
        if self.extents.len() != self.dim {
            return Err(Error::invalid(format!(
                "{} extents given for dimension {}",
                self.extents.len(),
                self.dim
            )));
        }
        FrequencySet::rect(self.dim, &self.extents)?;
        if let Some(g) = &self.gamma_extents {
            FrequencySet::rect(self.dim, g)?;
        }
        if matches!(self.scenario, Scenario::Fig4 | Scenario::RankIdentity)
            && self.gamma_extents.is_none()
        {
            return Err(Error::invalid("this scenario needs gamma extents"));
        }
        if !matches!(self.scenario, Scenario::Fig4) && self.allocations.is_empty() {
            return Err(Error::invalid("at least one sample allocation is required"));
        }
        let components = self.allocations.first().map_or(1, Vec::len);
        for a in &self.allocations {
            if a.is_empty() || a.len() != components {
                return Err(Error::invalid(
                    "every allocation must list one count per component",
                ));
            }
            if a.iter().sum::<usize>() == 0 {
                return Err(Error::invalid("allocation has no samples"));
            }
        }
        if self.scenario == Scenario::RankIdentity && components != 1 {
            return Err(Error::invalid("rank identity runs on a single surface"));
        }
        for (name, v) in [
            ("root tolerance", self.root_tol),
            ("rank tolerance", self.rank_tol),
            ("pseudo-inverse tolerance", self.pinv_tol),
            ("interpolation tolerance", self.interp_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive")));
            }
        }
        if !(0.0..=1.0).contains(&self.rate_threshold) {
            return Err(Error::invalid("rate threshold must lie in [0, 1]"));
        }
        Ok(())
    }

    fn sampler(&self) -> SamplerConfig {
        SamplerConfig {
            tol: self.root_tol,
            max_attempts: self.max_attempts,
        }
    }

    fn lambda(&self) -> Result<FrequencySet> {
        FrequencySet::rect(self.dim, &self.extents)
    }

    fn gamma(&self) -> Result<FrequencySet> {
        let g = self
            .gamma_extents
            .as_ref()
            .ok_or_else(|| Error::invalid("gamma extents are not set"))?;
        FrequencySet::rect(self.dim, g)
    }

    fn trial_seed(&self, trial: usize) -> u64 {
        self.seed.wrapping_add(trial as u64)
    }
}

/// One row of a recovery experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: usize,
    pub success: bool,
    #[serde(rename = "match")]
    pub match_score: f64,
    pub null_space_dim: usize,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRecord {
    pub trial_index: usize,
    pub success: bool,
    pub observed_rank: usize,
    pub predicted_rank: usize,
    pub control_rank: usize,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterpolationRecord {
    pub trial_index: usize,
    pub success: bool,
    /// Largest on-surface `|f_hat - f|` divided by the coefficient norm.
    pub on_surface_max_err: f64,
    /// Median off-surface `|f_hat - f|` divided by the coefficient norm.
    pub off_surface_median_dev: f64,
    pub anchors: usize,
    pub runtime_ms: f64,
    #[serde(skip)]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Records {
    Recovery(Vec<TrialRecord>),
    Rank(Vec<RankRecord>),
    Interpolation(Vec<InterpolationRecord>),
}

impl Records {
    fn successes(&self) -> usize {
        match self {
            Records::Recovery(r) => r.iter().filter(|t| t.success).count(),
            Records::Rank(r) => r.iter().filter(|t| t.success).count(),
            Records::Interpolation(r) => r.iter().filter(|t| t.success).count(),
        }
    }

    fn failures(&self) -> usize {
        match self {
            Records::Recovery(r) => r.iter().filter(|t| t.error.is_some()).count(),
            Records::Rank(r) => r.iter().filter(|t| t.error.is_some()).count(),
            Records::Interpolation(r) => r.iter().filter(|t| t.error.is_some()).count(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Records::Recovery(r) => r.len(),
            Records::Rank(r) => r.len(),
            Records::Interpolation(r) => r.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Per-trial CSV, sorted by trial index.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        match self {
            Records::Recovery(rows) => {
                w.write_record(["trial", "success", "match", "null_space_dim", "runtime_ms"])?;
                for r in rows {
                    w.write_record([
                        r.trial_index.to_string(),
                        r.success.to_string(),
                        format!("{:.17}", r.match_score),
                        r.null_space_dim.to_string(),
                        format!("{:.3}", r.runtime_ms),
                    ])?;
                }
            }
            Records::Rank(rows) => {
                w.write_record([
                    "trial",
                    "success",
                    "observed_rank",
                    "predicted_rank",
                    "control_rank",
                    "runtime_ms",
                ])?;
                for r in rows {
                    w.write_record([
                        r.trial_index.to_string(),
                        r.success.to_string(),
                        r.observed_rank.to_string(),
                        r.predicted_rank.to_string(),
                        r.control_rank.to_string(),
                        format!("{:.3}", r.runtime_ms),
                    ])?;
                }
            }
            Records::Interpolation(rows) => {
                w.write_record([
                    "trial",
                    "success",
                    "on_surface_max_err",
                    "off_surface_median_dev",
                    "anchors",
                    "runtime_ms",
                ])?;
                for r in rows {
                    w.write_record([
                        r.trial_index.to_string(),
                        r.success.to_string(),
                        format!("{:.16e}", r.on_surface_max_err),
                        format!("{:.16e}", r.off_surface_median_dev),
                        r.anchors.to_string(),
                        format!("{:.3}", r.runtime_ms),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Aggregate over the trials of one allocation (or one interpolation setup).
#[derive(Debug, Clone)]
pub struct Summary {
    pub scenario: Scenario,
    pub label: String,
    pub allocation: Vec<usize>,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub mean_match: Option<f64>,
    /// Whether the sampling conditions predict success for this setup.
    pub expected_success: bool,
    /// Scenario-specific statistics.
    pub extra: Value,
    pub records: Records,
}

impl Summary {
    fn new(
        cfg: &ExperimentConfig,
        label: String,
        allocation: Vec<usize>,
        expected_success: bool,
        extra: Value,
        records: Records,
    ) -> Self {
        let trials = records.len();
        let successes = records.successes();
        let mean_match = match &records {
            Records::Recovery(r) => {
                Some(r.iter().map(|t| t.match_score).sum::<f64>() / trials as f64)
            }
            _ => None,
        };
        let mut extra = extra;
        extra["failures"] = json!(records.failures());
        Summary {
            scenario: cfg.scenario,
            label,
            allocation,
            trials,
            successes,
            success_rate: successes as f64 / trials as f64,
            mean_match,
            expected_success,
            extra,
            records,
        }
    }

    /// True when the observed rate agrees with the prediction: at least
    /// `rate_threshold` when success is expected, at most `1 - rate_threshold`
    /// otherwise.
    pub fn meets_expectation(&self, rate_threshold: f64) -> bool {
        if self.expected_success {
            self.success_rate >= rate_threshold
        } else {
            self.success_rate <= 1.0 - rate_threshold
        }
    }

    pub fn to_json(&self, cfg: &ExperimentConfig, records_csv: Option<&Path>) -> Value {
        let mut v = json!({
            "scenario": self.scenario.name(),
            "trials": self.trials,
            "success_rate": self.success_rate,
            "mean_match": self.mean_match,
            "config": cfg,
            "records_csv": records_csv.map(|p| p.display().to_string()),
            "label": self.label,
            "allocation": self.allocation,
            "successes": self.successes,
            "expected_success": self.expected_success,
        });
        if let (Value::Object(dst), Value::Object(src)) = (&mut v, &self.extra) {
            for (k, val) in src {
                dst.insert(k.clone(), val.clone());
            }
        }
        v
    }
}

/// Runs the scenario named in `cfg`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<Summary>> {
    cfg.validate()?;
    match cfg.scenario {
        Scenario::Fig4 => Ok(vec![run_interpolation_experiment(cfg)?]),
        Scenario::RankIdentity => run_rank_identity_experiment(cfg),
        _ if cfg.allocations.first().map_or(1, Vec::len) > 1 => run_union_experiment(cfg),
        _ => run_irreducible_experiment(cfg),
    }
}

fn elapsed_ms(cfg: &ExperimentConfig, start: Instant) -> f64 {
    if cfg.record_timing {
        start.elapsed().as_secs_f64() * 1e3
    } else {
        0.0
    }
}

fn failed_recovery(trial: usize, runtime_ms: f64, e: Error) -> TrialRecord {
    TrialRecord {
        trial_index: trial,
        success: false,
        match_score: 0.0,
        null_space_dim: 0,
        runtime_ms,
        error: Some(e.to_string()),
    }
}

fn score_recovery(
    cfg: &ExperimentConfig,
    trial: usize,
    start: Instant,
    samples: &SampleSet,
    truth: &TrigPolynomial,
) -> Result<TrialRecord> {
    let result = recover_coefficients(samples, truth.support(), cfg.rank_tol)?;
    let m = coefficient_match(&result.coefficients, truth)?;
    Ok(TrialRecord {
        trial_index: trial,
        success: result.unique && m >= 1.0 - cfg.match_tol,
        match_score: m,
        null_space_dim: result.null_space_dim,
        runtime_ms: elapsed_ms(cfg, start),
        error: None,
    })
}

/// Random irreducible surface, `N` samples on it, recovery at its bandwidth.
pub fn run_irreducible_experiment(cfg: &ExperimentConfig) -> Result<Vec<Summary>> {
    cfg.validate()?;
    let lambda = cfg.lambda()?;
    let sampler = cfg.sampler();
    let mut out = Vec::new();
    for alloc in &cfg.allocations {
        if alloc.len() != 1 {
            return Err(Error::invalid(
                "irreducible experiments take one count per allocation",
            ));
        }
        let n = alloc[0];
        let records = (0..cfg.trials)
            .map(|trial| {
                let start = Instant::now();
                let seed = cfg.trial_seed(trial);
                let run = || -> Result<TrialRecord> {
                    let psi = cfg
                        .curve_model
                        .generate(&lambda, derive_seed(seed, TAG_CURVE))?;
                    let samples =
                        sample_zero_set(&psi, n, derive_seed(seed, TAG_SAMPLES), &sampler)?;
                    score_recovery(cfg, trial, start, &samples, &psi)
                };
                run().unwrap_or_else(|e| failed_recovery(trial, elapsed_ms(cfg, start), e))
            })
            .collect();
        let expected = n + 1 >= lambda.len();
        let extra = json!({
            "bandwidth_size": lambda.len(),
            "required_samples": lambda.len() - 1,
            "worst_case_samples": worst_case_count(&cfg.extents),
        });
        out.push(Summary::new(
            cfg,
            format!("N={n}"),
            alloc.clone(),
            expected,
            extra,
            Records::Recovery(records),
        ));
    }
    Ok(out)
}

/// `(sum k_i)^n`, the sample count of the deterministic worst-case guarantee
/// for a `k_1 x ... x k_n` bandwidth.
pub fn worst_case_count(extents: &[usize]) -> u64 {
    let sum: u64 = extents.iter().map(|&e| e as u64).sum();
    sum.pow(extents.len() as u32)
}

/// Product of `M` random surfaces, `N_i` samples on component `i`, recovery
/// at the Minkowski-sum bandwidth, scored against the product coefficients.
pub fn run_union_experiment(cfg: &ExperimentConfig) -> Result<Vec<Summary>> {
    cfg.validate()?;
    let lambda_i = cfg.lambda()?;
    let components = cfg.allocations[0].len();
    let mut lambda = lambda_i.clone();
    for _ in 1..components {
        lambda = lambda.minkowski_sum(&lambda_i)?;
    }
    let sampler = cfg.sampler();
    let mut out = Vec::new();
    for alloc in &cfg.allocations {
        let records = (0..cfg.trials)
            .map(|trial| {
                let start = Instant::now();
                let seed = cfg.trial_seed(trial);
                let run = || -> Result<TrialRecord> {
                    let factors = (0..components)
                        .map(|i| {
                            cfg.curve_model
                                .generate(&lambda_i, derive_seed(seed, TAG_CURVE + i as u64))
                        })
                        .collect::<Result<Vec<_>>>()?;
                    let mut truth = factors[0].clone();
                    for f in &factors[1..] {
                        truth = truth.multiply(f)?;
                    }
                    let samples =
                        sample_union(&factors, alloc, derive_seed(seed, TAG_SAMPLES), &sampler)?;
                    score_recovery(cfg, trial, start, &samples, &truth)
                };
                run().unwrap_or_else(|e| failed_recovery(trial, elapsed_ms(cfg, start), e))
            })
            .collect();
        let per_component = lambda_i.len() - 1;
        let total: usize = alloc.iter().sum();
        let expected = alloc.iter().all(|&n| n >= per_component) && total + 1 >= lambda.len();
        let extra = json!({
            "component_bandwidth_size": lambda_i.len(),
            "bandwidth_size": lambda.len(),
            "required_per_component": per_component,
            "required_total": lambda.len() - 1,
        });
        let label = alloc
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join("+");
        out.push(Summary::new(
            cfg,
            label,
            alloc.clone(),
            expected,
            extra,
            Records::Recovery(records),
        ));
    }
    Ok(out)
}

/// On-surface rank of the over-estimated-bandwidth features against
/// `|gamma| - |gamma : lambda|`, with uniformly random points as a control.
pub fn run_rank_identity_experiment(cfg: &ExperimentConfig) -> Result<Vec<Summary>> {
    cfg.validate()?;
    let lambda = cfg.lambda()?;
    let gamma = cfg.gamma()?;
    let predicted = anchor_count(&gamma, &lambda)?;
    let sampler = cfg.sampler();
    let mut out = Vec::new();
    for alloc in &cfg.allocations {
        let n = alloc[0];
        let control_expected = n.min(gamma.len());
        let records: Vec<RankRecord> = (0..cfg.trials)
            .map(|trial| {
                let start = Instant::now();
                let seed = cfg.trial_seed(trial);
                let run = || -> Result<RankRecord> {
                    let psi = cfg
                        .curve_model
                        .generate(&lambda, derive_seed(seed, TAG_CURVE))?;
                    let samples =
                        sample_zero_set(&psi, n, derive_seed(seed, TAG_SAMPLES), &sampler)?;
                    let check = rank_identity_check(&samples, &gamma, &lambda, cfg.rank_tol)?;
                    let off = uniform_points(cfg.dim, n, derive_seed(seed, TAG_OFF_SURFACE));
                    let control_rank =
                        numerical_rank(feature_matrix(&gamma, &off)?.values(), cfg.rank_tol)?;
                    Ok(RankRecord {
                        trial_index: trial,
                        success: check.observed == check.predicted,
                        observed_rank: check.observed,
                        predicted_rank: check.predicted,
                        control_rank,
                        runtime_ms: elapsed_ms(cfg, start),
                        error: None,
                    })
                };
                run().unwrap_or_else(|e| RankRecord {
                    trial_index: trial,
                    success: false,
                    observed_rank: 0,
                    predicted_rank: predicted,
                    control_rank: 0,
                    runtime_ms: elapsed_ms(cfg, start),
                    error: Some(e.to_string()),
                })
            })
            .collect();
        let control_hits = records
            .iter()
            .filter(|r| r.control_rank == control_expected)
            .count();
        let extra = json!({
            "gamma_size": gamma.len(),
            "shift_set_size": gamma.len() - predicted,
            "predicted_rank": predicted,
            "control_expected_rank": control_expected,
            "control_rate": control_hits as f64 / records.len() as f64,
        });
        out.push(Summary::new(
            cfg,
            format!("N={n}"),
            alloc.clone(),
            n >= predicted,
            extra,
            Records::Rank(records),
        ));
    }
    Ok(out)
}

/// Random curve, random function over the larger bandwidth, certified
/// anchors, kernel interpolant; errors on fresh on-surface points and
/// deviations on uniform off-surface points.
pub fn run_interpolation_experiment(cfg: &ExperimentConfig) -> Result<Summary> {
    cfg.validate()?;
    let lambda = cfg.lambda()?;
    let gamma = cfg.gamma()?;
    let p = anchor_count(&gamma, &lambda)?;
    let sampler = cfg.sampler();
    let options = AnchorOptions {
        pool_factor: cfg.anchor_pool_factor,
        max_retries: cfg.anchor_retries,
        sampler,
        rank_tol: cfg.rank_tol,
    };
    let records: Vec<InterpolationRecord> = (0..cfg.trials)
        .map(|trial| {
            let start = Instant::now();
            let seed = cfg.trial_seed(trial);
            let run = || -> Result<InterpolationRecord> {
                let psi = cfg
                    .curve_model
                    .generate(&lambda, derive_seed(seed, TAG_CURVE))?;
                let f = random_polynomial(&gamma, derive_seed(seed, TAG_FUNCTION))?;
                let anchors =
                    select_anchors_with(&psi, &gamma, derive_seed(seed, TAG_ANCHORS), &options)?;
                let itp = interpolate(&f, &anchors, cfg.pinv_tol)?;
                let scale = f.l2_norm();
                let tests = sample_zero_set(
                    &psi,
                    cfg.test_points,
                    derive_seed(seed, TAG_TEST_POINTS),
                    &sampler,
                )?;
                let mut on = 0.0f64;
                for x in tests.points() {
                    on = on.max((itp.eval(x)? - f.eval(x)?).norm() / scale);
                }
                let off =
                    uniform_points(cfg.dim, cfg.test_points, derive_seed(seed, TAG_OFF_SURFACE));
                let mut devs = off
                    .iter()
                    .map(|x| Ok((itp.eval(x)? - f.eval(x)?).norm() / scale))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(InterpolationRecord {
                    trial_index: trial,
                    success: on <= cfg.interp_tol,
                    on_surface_max_err: on,
                    off_surface_median_dev: median(&mut devs),
                    anchors: itp.parameter_count(),
                    runtime_ms: elapsed_ms(cfg, start),
                    error: None,
                })
            };
            run().unwrap_or_else(|e| InterpolationRecord {
                trial_index: trial,
                success: false,
                on_surface_max_err: f64::INFINITY,
                off_surface_median_dev: f64::NAN,
                anchors: 0,
                runtime_ms: elapsed_ms(cfg, start),
                error: Some(e.to_string()),
            })
        })
        .collect();
    let built: Vec<&InterpolationRecord> = records.iter().filter(|r| r.error.is_none()).collect();
    let mut on: Vec<f64> = built.iter().map(|r| r.on_surface_max_err).collect();
    let mut off: Vec<f64> = built.iter().map(|r| r.off_surface_median_dev).collect();
    let separated = built
        .iter()
        .filter(|r| r.off_surface_median_dev >= 1e3 * r.on_surface_max_err)
        .count();
    let extra = json!({
        "anchors": p,
        "gamma_size": gamma.len(),
        "on_surface_max_err": on.iter().copied().fold(0.0, f64::max),
        "on_surface_max_err_median": if on.is_empty() { None } else { Some(median(&mut on)) },
        "off_surface_deviation_median": if off.is_empty() { None } else { Some(median(&mut off)) },
        "off_surface_deviation_min": off.iter().copied().reduce(f64::min),
        "separated_rate": separated as f64 / records.len() as f64,
    });
    Ok(Summary::new(
        cfg,
        format!("P={p}"),
        vec![],
        true,
        extra,
        Records::Interpolation(records),
    ))
}

fn uniform_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Files written for one summary.
#[derive(Debug, Clone)]
pub struct WrittenSummary {
    pub summary_json: PathBuf,
    pub records_csv: PathBuf,
}

/// Writes `<scenario>[_<label>]_summary.json` and `..._trials.csv` per summary.
pub fn write_outputs(
    cfg: &ExperimentConfig,
    summaries: &[Summary],
    dir: &Path,
) -> Result<Vec<WrittenSummary>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for s in summaries {
        let stem = if summaries.len() == 1 {
            cfg.scenario.name().to_string()
        } else {
            format!("{}_{}", cfg.scenario.name(), file_label(&s.label))
        };
        let csv_path = dir.join(format!("{stem}_trials.csv"));
        let json_path = dir.join(format!("{stem}_summary.json"));
        s.records.write_csv(fs::File::create(&csv_path)?)?;
        let doc = s.to_json(cfg, Some(&csv_path));
        let mut text = serde_json::to_string_pretty(&doc).map_err(Error::from)?;
        text.push('\n');
        fs::write(&json_path, text)?;
        written.push(WrittenSummary {
            summary_json: json_path,
            records_csv: csv_path,
        });
    }
    Ok(written)
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}
