//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line. Timed criteria hold a shared lock so
//! wall-clock runtimes are not inflated by tests running side by side.
//!
//! Run with `cargo test --test acceptance -- --nocapture` to see the lines.

use std::process::Command;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use levelset::harness::{
    run_experiment, ExperimentConfig, Records, Scenario, Summary, TrialRecord,
};
use levelset::interpolant::{kernel_matrix, select_anchors};
use levelset::recovery::{coefficient_match, recover_coefficients, DEFAULT_RANK_TOL};
use levelset::trigpoly::{dirichlet_kernel, random_polynomial, random_zero_mean_polynomial};
use levelset::zerosampler::{
    derive_seed, sample_union, sample_zero_set, SamplerConfig, DEFAULT_ROOT_TOL,
};
use levelset::{FrequencySet, SampleSet, TrigPolynomial};

static TIMED: Mutex<()> = Mutex::new(());

const TRIALS: usize = 100;
const MATCH_TOL: f64 = 1e-8;
const REQUIRED: usize = 95;

fn report(criterion: u32, pass: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn timed_run(scenario: Scenario) -> (Vec<Summary>, Duration) {
    let cfg = ExperimentConfig {
        trials: TRIALS,
        seed: 0,
        record_timing: false,
        ..ExperimentConfig::preset(scenario)
    };
    let _guard = TIMED.lock().unwrap_or_else(|e| e.into_inner());
    let start = Instant::now();
    let summaries = run_experiment(&cfg).expect("experiment runs");
    (summaries, start.elapsed())
}

fn recovery_records(s: &Summary) -> &[TrialRecord] {
    match &s.records {
        Records::Recovery(r) => r,
        _ => panic!("expected recovery records"),
    }
}

fn non_unique(s: &Summary) -> usize {
    recovery_records(s)
        .iter()
        .filter(|r| r.error.is_none() && r.null_space_dim > 1)
        .count()
}

fn strict_successes(s: &Summary) -> usize {
    recovery_records(s)
        .iter()
        .filter(|r| r.null_space_dim == 1 && r.match_score >= 1.0 - MATCH_TOL)
        .count()
}

fn find<'a>(summaries: &'a [Summary], allocation: &[usize]) -> &'a Summary {
    summaries
        .iter()
        .find(|s| s.allocation == allocation)
        .expect("allocation present")
}

fn critical_pair(criterion: u32, scenario: Scenario, under: usize, at: usize, limit: Duration) {
    let (summaries, elapsed) = timed_run(scenario);
    let below = non_unique(find(&summaries, &[under]));
    let good = strict_successes(find(&summaries, &[at]));
    let pass = below == TRIALS && good >= REQUIRED && elapsed < limit;
    report(
        criterion,
        pass,
        &format!(
            "N={under}: {below}/{TRIALS} non-unique; N={at}: {good}/{TRIALS} unique with match >= 1-1e-8; {:.2}s (limit {}s)",
            elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    );
}

#[test]
fn criterion_1_planar_curve_critical_count() {
    critical_pair(1, Scenario::Fig1, 7, 8, Duration::from_secs(5));
}

#[test]
fn criterion_2_surface_critical_count() {
    critical_pair(2, Scenario::Fig2, 25, 26, Duration::from_secs(10));
}

#[test]
fn criterion_3_union_allocations() {
    let (summaries, elapsed) = timed_run(Scenario::Fig3);
    let rate = |a: &[usize]| strict_successes(find(&summaries, a));
    let (a, b, c, d, e) = (
        rate(&[8, 16]),
        rate(&[16, 8]),
        rate(&[7, 17]),
        rate(&[17, 7]),
        rate(&[8, 8]),
    );
    let pass = a >= REQUIRED
        && b >= REQUIRED
        && c <= TRIALS - REQUIRED
        && d <= TRIALS - REQUIRED
        && e == 0
        && elapsed < Duration::from_secs(30);
    report(
        3,
        pass,
        &format!(
            "(8,16) {a}/100, (16,8) {b}/100 [need >= 95]; (7,17) {c}/100, (17,7) {d}/100 [need <= 5]; (8,8) {e}/100 [need 0]; {:.2}s (limit 30s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_4_degree_five_surface_count() {
    let (summaries, elapsed) = timed_run(Scenario::Dim3Counts);
    let s = find(&summaries, &[124]);
    let good = strict_successes(s);
    let worst = s.extra["worst_case_samples"].as_u64().unwrap();
    let pass = good >= REQUIRED && worst == 3375 && elapsed < Duration::from_secs(60);
    report(
        4,
        pass,
        &format!(
            "N=124 (vs worst case {worst}): {good}/100 succeeded; {:.2}s (limit 60s)",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_5_on_curve_rank() {
    let (summaries, elapsed) = timed_run(Scenario::RankIdentity);
    let records = match &summaries[0].records {
        Records::Rank(r) => r,
        _ => panic!("expected rank records"),
    };
    let hits = records
        .iter()
        .filter(|r| r.observed_rank == 48 && r.predicted_rank == 48)
        .count();
    let control = records.iter().filter(|r| r.control_rank == 60).count();
    let pass = hits >= REQUIRED && control == TRIALS;
    report(
        5,
        pass,
        &format!(
            "on-curve rank 48 in {hits}/100; off-curve rank 60 = min(169, 60) in {control}/100; {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_6_interpolant_on_curve() {
    let (summaries, elapsed) = timed_run(Scenario::Fig4);
    let s = &summaries[0];
    let records = match &s.records {
        Records::Interpolation(r) => r,
        _ => panic!("expected interpolation records"),
    };
    let good = records
        .iter()
        .filter(|r| r.error.is_none() && r.on_surface_max_err <= 1e-6)
        .count();
    let sizes_ok = records
        .iter()
        .filter(|r| r.error.is_none())
        .all(|r| r.anchors == 48)
        && s.extra["gamma_size"] == 169;
    let pass = good >= REQUIRED && sizes_ok;
    report(
        6,
        pass,
        &format!(
            "max on-curve error <= 1e-6*|a| in {good}/100; 48 weights vs 169 coefficients: {sizes_ok}; off-curve median deviation {}; {:.2}s",
            s.extra["off_surface_deviation_median"],
            elapsed.as_secs_f64()
        ),
    );
}

fn rect(dim: usize, e: &[usize]) -> FrequencySet {
    FrequencySet::rect(dim, e).unwrap()
}

fn random_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

fn wrap(v: f64) -> f64 {
    let w = v.rem_euclid(1.0);
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

fn annihilation_residuals() -> Result<(), String> {
    let cfg = SamplerConfig::default();
    for (dim, e) in [(2, vec![3, 3]), (3, vec![3, 3, 3]), (2, vec![5, 5])] {
        let lambda = rect(dim, &e);
        let bound = 10.0 * lambda.len() as f64 * DEFAULT_ROOT_TOL;
        for seed in 0..20 {
            let psi = random_zero_mean_polynomial(&lambda, seed).unwrap();
            let s = sample_zero_set(&psi, 30, seed, &cfg).unwrap();
            for x in s.points() {
                let r = psi.eval(x).unwrap().norm();
                if r > bound {
                    return Err(format!("residual {r:e} above {bound:e}"));
                }
            }
        }
    }
    let l = rect(2, &[3, 3]);
    let factors: Vec<TrigPolynomial> = (0..2)
        .map(|i| random_zero_mean_polynomial(&l, 50 + i).unwrap())
        .collect();
    let product = factors[0].multiply(&factors[1]).unwrap();
    let bound = 10.0 * product.support().len() as f64 * DEFAULT_ROOT_TOL;
    let s = sample_union(&factors, &[12, 12], 7, &cfg).unwrap();
    for x in s.points() {
        if product.eval(x).unwrap().norm() > bound {
            return Err("union residual above bound".into());
        }
    }
    Ok(())
}

fn kernel_diagonal() -> Result<(), String> {
    for (dim, e) in [(2, vec![13, 13]), (3, vec![3, 5, 7]), (1, vec![9])] {
        let g = rect(dim, &e);
        for x in random_points(dim, 50, 3) {
            let k = dirichlet_kernel(&g, &x, &x).unwrap();
            if (k - Complex64::new(g.len() as f64, 0.0)).norm() > 1e-12 {
                return Err(format!("k(x,x) = {k} for |gamma| = {}", g.len()));
            }
        }
    }
    Ok(())
}

fn kernel_hermitian_psd() -> Result<(), String> {
    let lambda = rect(2, &[3, 3]);
    let gamma = rect(2, &[13, 13]);
    for seed in 0..5 {
        let psi = random_zero_mean_polynomial(&lambda, seed).unwrap();
        let anchors = select_anchors(&psi, &gamma, seed, 20).map_err(|e| e.to_string())?;
        check_kernel(&kernel_matrix(&gamma, &anchors).unwrap())?;
    }
    let pts = SampleSet::from_points(2, random_points(2, 30, 9)).unwrap();
    check_kernel(&kernel_matrix(&gamma, &pts).unwrap())
}

fn check_kernel(k: &nalgebra::DMatrix<Complex64>) -> Result<(), String> {
    let scale = k.norm();
    if (k - k.adjoint()).norm() > 1e-12 * scale {
        return Err("kernel matrix not Hermitian".into());
    }
    let eig = SymmetricEigen::new(k.clone());
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -1e-10 * scale {
        return Err(format!("kernel eigenvalue {min:e} below zero"));
    }
    Ok(())
}

fn multiply_homomorphism() -> Result<(), String> {
    let a = random_polynomial(&rect(2, &[3, 5]), 1).unwrap();
    let b = random_polynomial(&rect(2, &[5, 3]), 2).unwrap();
    let ab = a.multiply(&b).unwrap();
    for x in random_points(2, 100, 4) {
        let lhs = ab.eval(&x).unwrap();
        let rhs = a.eval(&x).unwrap() * b.eval(&x).unwrap();
        if (lhs - rhs).norm() > 1e-10 {
            return Err(format!("product mismatch {:e}", (lhs - rhs).norm()));
        }
    }
    Ok(())
}

fn translation_covariance() -> Result<(), String> {
    let lambda = rect(2, &[3, 3]);
    let cfg = SamplerConfig::default();
    for seed in 0..20u64 {
        let psi = random_zero_mean_polynomial(&lambda, seed).unwrap();
        let t = random_points(2, 1, derive_seed(seed, 1)).remove(0);
        let samples = sample_zero_set(&psi, 12, seed, &cfg).unwrap();
        let moved: Vec<Vec<f64>> = samples
            .points()
            .iter()
            .map(|x| x.iter().zip(&t).map(|(a, b)| wrap(a + b)).collect())
            .collect();
        let moved = SampleSet::from_points(2, moved).unwrap();
        let truth = psi.translate(&t).unwrap();
        let rec = recover_coefficients(&moved, &lambda, DEFAULT_RANK_TOL).unwrap();
        let m = coefficient_match(&rec.coefficients, &truth).unwrap();
        if !rec.unique || m < 1.0 - MATCH_TOL {
            return Err(format!("seed {seed}: unique {} match {m}", rec.unique));
        }
    }
    Ok(())
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_levelset"))
        .args(args)
        .output()
        .expect("binary runs");
    assert!(out.status.success(), "{args:?} failed");
    out.stdout
}

fn determinism() -> Result<(), String> {
    let gen = ["gen", "--dim", "2", "--extents", "3,3", "--seed", "1"];
    if run_cli(&gen) != run_cli(&gen) {
        return Err("gen output differs between runs".into());
    }
    let dir = tempfile::tempdir().unwrap();
    let poly = dir.path().join("p.json");
    std::fs::write(&poly, run_cli(&gen)).unwrap();
    let sample = [
        "sample",
        "--poly",
        poly.to_str().unwrap(),
        "-n",
        "20",
        "--seed",
        "4",
    ];
    if run_cli(&sample) != run_cli(&sample) {
        return Err("sample output differs between runs".into());
    }
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        run_cli(&[
            "experiment",
            "fig3",
            "--trials",
            "5",
            "--no-timing",
            "--out",
            d.to_str().unwrap(),
        ]);
    }
    for name in ["fig3_8_16_trials.csv", "fig3_7_17_trials.csv"] {
        if std::fs::read(a.join(name)).unwrap() != std::fs::read(b.join(name)).unwrap() {
            return Err(format!("{name} differs between runs"));
        }
    }
    let strip = |p: std::path::PathBuf| {
        let mut v: serde_json::Value = serde_json::from_slice(&std::fs::read(p).unwrap()).unwrap();
        v["records_csv"] = serde_json::Value::Null;
        v
    };
    if strip(a.join("fig3_8_16_summary.json")) != strip(b.join("fig3_8_16_summary.json")) {
        return Err("summary differs between runs".into());
    }
    Ok(())
}

type Check = fn() -> Result<(), String>;

#[test]
fn criterion_7_property_suites() {
    let checks: [(&str, Check); 6] = [
        ("annihilation residual", annihilation_residuals),
        ("kernel diagonal", kernel_diagonal),
        ("kernel Hermitian PSD", kernel_hermitian_psd),
        ("multiply homomorphism", multiply_homomorphism),
        ("translation covariance", translation_covariance),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (name, check) in checks {
        if let Err(e) = check() {
            failed.push(format!("{name}: {e}"));
        }
    }
    let detail = if failed.is_empty() {
        "annihilation residual, kernel diagonal, Hermitian PSD kernel, multiply homomorphism, translation covariance, determinism".to_string()
    } else {
        failed.join("; ")
    };
    report(7, failed.is_empty(), &detail);
}
