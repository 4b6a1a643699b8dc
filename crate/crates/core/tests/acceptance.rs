//! Acceptance suite. Each test prints one `PASS`/`FAIL` line and then asserts.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see the lines.

use std::process::Command;

use dac_krr::experiments::verify::{
    check_approximation, check_concentration, check_effective_dimension, check_representation, check_second_order,
    check_single_block, ApproximationCheck, ConcentrationCheck, EffectiveDimensionCheck, EquivalenceCheck,
    RepresentationCheck, SecondOrderCheck,
};
use dac_krr::experiments::{
    monotonicity_report, parse_config, run_rate_experiment, ExperimentConfig, Metric,
};

fn report(id: u32, name: &str, passed: bool, detail: &str) {
    println!("[acceptance {id:>2}] {} {name}: {detail}", if passed { "PASS" } else { "FAIL" });
}

const SEED: u64 = 20_240_601;

#[test]
fn single_block_average_equals_batch() {
    let o = check_single_block(&EquivalenceCheck::default(), SEED).unwrap();
    report(1, "m=1 equivalence", o.passed, &format!("worst relative K-gap {:.2e} (≤ {:.0e})", o.value, o.threshold));
    assert!(o.passed);
}

#[test]
fn second_order_inverse_expansion() {
    let o = check_second_order(&SecondOrderCheck::default(), SEED).unwrap();
    report(2, "second-order decomposition", o.passed, &format!("worst residual {:.2e} (≤ {:.0e})", o.value, o.threshold));
    assert!(o.passed);
}

#[test]
fn averaged_minus_batch_representation() {
    let o = check_representation(&RepresentationCheck::default(), SEED).unwrap();
    report(3, "difference representation", o.passed, &format!("worst discrepancy {:.2e} (≤ {:.0e})", o.value, o.threshold));
    assert!(o.passed);
}

#[test]
fn effective_dimension_empirical_and_decay() {
    let outcomes = check_effective_dimension(&EffectiveDimensionCheck::default(), SEED).unwrap();
    let passed = outcomes.iter().all(|o| o.passed);
    let detail: Vec<String> = outcomes.iter().map(|o| format!("{}={:.4}", o.check, o.value)).collect();
    report(4, "effective dimension", passed, &detail.join(" "));
    assert!(passed, "{outcomes:?}");
}

#[test]
fn approximation_error_bounds() {
    let outcomes = check_approximation(&ApproximationCheck::default(), SEED).unwrap();
    let passed = outcomes.iter().all(|o| o.passed);
    let detail: Vec<String> = outcomes.iter().map(|o| format!("{}={:.4}", o.check, o.value)).collect();
    report(5, "approximation error", passed, &detail.join(" "));
    assert!(passed, "{outcomes:?}");
}

fn experiment(json: &str) -> ExperimentConfig {
    let cfg: ExperimentConfig = parse_config(json, false).unwrap();
    cfg.validate().unwrap();
    cfg
}

#[test]
fn single_machine_minimax_rate() {
    let cfg = experiment(
        r#"{
            "kernel": {"kind": "periodic_sobolev", "s": 1},
            "target": {"r": 0.5, "decay": 1.0, "seed": 0},
            "noise": {"kind": "bounded_uniform", "half_width": 1.0},
            "n_grid": [256, 512, 1024, 2048, 4096],
            "m": {"rule": "fixed", "values": [1]},
            "lambda": {"rule": "minimax"},
            "metrics": ["batch_minus_target_rho"],
            "trials": 20,
            "seed": 6
        }"#,
    );
    let res = run_rate_experiment(&cfg).unwrap();
    let fit = res.fit(Metric::BatchMinusTargetRho, "m=1").unwrap();
    let passed = fit.within(-1.0 / 3.0, 0.08);
    let means: Vec<String> = res.rows().map(|r| format!("{:.4}", r.mean)).collect();
    report(
        6,
        "single-machine rate",
        passed,
        &format!("slope {:.4} ± {:.4} (target -1/3 ± 0.08), means [{}]", fit.slope, fit.stderr, means.join(", ")),
    );
    assert!(passed);
}

#[test]
fn averaged_vs_batch_gap_decreases_in_m() {
    let cfg = experiment(
        r#"{
            "kernel": {"kind": "periodic_sobolev", "s": 1},
            "target": {"r": 0.5, "decay": 1.0, "seed": 0},
            "noise": {"kind": "bounded_uniform", "half_width": 1.0},
            "n_grid": [2048],
            "m": {"rule": "fixed", "values": [2, 4, 8, 16]},
            "lambda": {"rule": "block_ratio"},
            "metrics": ["avg_minus_batch_rho"],
            "trials": 30,
            "seed": 7
        }"#,
    );
    let res = run_rate_experiment(&cfg).unwrap();
    let steps = monotonicity_report(&res, Metric::AvgMinusBatchRho, 2048);
    let within = steps.iter().all(|s| s.drop > -2.0 * s.pooled_stderr);
    let strict = steps.iter().all(|s| s.drop > 0.0);
    let means: Vec<String> = res.rows().map(|r| format!("m={}:{:.5}±{:.5}", r.m, r.mean, r.stderr)).collect();
    let paired: Vec<String> = steps
        .iter()
        .map(|s| format!("{}→{}:{}", s.m_from, s.m_to, if s.significant { "sig" } else { "n.s." }))
        .collect();
    report(
        7,
        "gap decreasing in m",
        within && strict,
        &format!("{} | strict decrease {strict} | paired one-sided {}", means.join(" "), paired.join(" ")),
    );
    assert!(within && strict, "{steps:?}");
}

#[test]
fn distributed_minimax_rate() {
    let cfg = experiment(
        r#"{
            "kernel": {"kind": "periodic_sobolev", "s": 1},
            "target": {"r": 1.0, "decay": 1.0, "seed": 0},
            "noise": {"kind": "bounded_uniform", "half_width": 1.0},
            "n_grid": [512, 1024, 2048, 4096],
            "m": {"rule": "restriction", "restriction": "distributed_minimax"},
            "lambda": {"rule": "distributed_minimax"},
            "metrics": ["avg_minus_target_rho"],
            "trials": 20,
            "seed": 8
        }"#,
    );
    let res = run_rate_experiment(&cfg).unwrap();
    let fit = res.fit(Metric::AvgMinusTargetRho, "m=distributed_minimax").unwrap();
    let passed = fit.within(-0.4, 0.10);
    let rows: Vec<String> = res.rows().map(|r| format!("N={} m={}:{:.4}", r.n, r.m, r.mean)).collect();
    report(
        8,
        "distributed rate",
        passed,
        &format!("slope {:.4} ± {:.4} (target -0.4 ± 0.10), {}", fit.slope, fit.stderr, rows.join(" ")),
    );
    assert!(passed);
}

#[test]
fn operator_concentration() {
    let outcomes = check_concentration(&ConcentrationCheck::default(), SEED).unwrap();
    let passed = outcomes.iter().all(|o| o.passed);
    let worst_ratio = outcomes
        .iter()
        .filter(|o| o.check.starts_with("hs_"))
        .map(|o| o.value)
        .fold(0.0, f64::max);
    let worst_z = outcomes
        .iter()
        .filter(|o| o.check.starts_with("kx_"))
        .map(|o| o.value)
        .fold(0.0, f64::max);
    report(
        9,
        "concentration",
        passed,
        &format!("worst HS mean / bound {worst_ratio:.4} (≤ 1), worst |z| for the K_x norm {worst_z:.2} (≤ 3)"),
    );
    assert!(passed, "{outcomes:?}");
}

#[test]
fn rate_experiment_csv_is_worker_independent() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("rates.toml");
    std::fs::write(
        &config,
        r#"
n_grid = [64, 128, 256]
trials = 5
seed = 10
metrics = ["avg_minus_batch_rho", "avg_minus_batch_k", "avg_minus_target_rho"]

[kernel]
kind = "periodic_sobolev"
s = 1
k_max = 200

[target]
r = 0.5

[noise]
kind = "bounded_uniform"
half_width = 0.5

[m]
rule = "fixed"
values = [1, 2, 4]

[lambda]
rule = "block_ratio"
"#,
    )
    .unwrap();
    let run = |workers: &str, out: &str| {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_dac-krr"))
            .args(["rate-experiment", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .args(["--workers", workers])
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        std::fs::read(out.join("rates.csv")).unwrap()
    };
    let a = run("1", "one");
    let b = run("4", "four");
    let passed = a == b && !a.is_empty();
    report(
        10,
        "determinism",
        passed,
        &format!("{} bytes, 1 vs 4 workers identical: {}", a.len(), a == b),
    );
    assert!(passed);
}
