//! The rate runner's spectral shortcuts against the direct estimator route.

use dac_krr::experiments::{parse_config, run_rate_experiment, ExperimentConfig, Metric, RhoNorm};
use dac_krr::rng::{self, purpose};
use dac_krr::synthetic::sample_dataset_with;
use dac_krr::{compare_estimators, make_source_target, make_spectral, partition, PartitionStrategy};

#[test]
fn runner_matches_direct_comparison() {
    let mut cfg: ExperimentConfig = parse_config(
        r#"{
            "kernel": {"kind": "periodic_sobolev", "s": 1, "k_max": 100},
            "target": {"r": 0.5},
            "noise": {"kind": "bounded_uniform", "half_width": 1.0},
            "n_grid": [300],
            "m": {"rule": "fixed", "values": [2, 5]},
            "lambda": {"rule": "block_ratio"},
            "metrics": ["avg_minus_batch_rho", "avg_minus_batch_k"],
            "trials": 3,
            "seed": 4
        }"#,
        false,
    )
    .unwrap();
    cfg.rho_norm = RhoNorm::Exact;
    let res = run_rate_experiment(&cfg).unwrap();

    let spec = make_spectral(&cfg.kernel).unwrap();
    let target = make_source_target(&spec, 0.5, 1.0, 0).unwrap();
    for m in [2, 5] {
        let cell_rho = res.cell(300, m, Metric::AvgMinusBatchRho).unwrap();
        let cell_k = res.cell(300, m, Metric::AvgMinusBatchK).unwrap();
        for t in 0..3 {
            let mut r = rng::stream(cfg.seed, &[purpose::DATA, 300, t as u64]);
            let data = sample_dataset_with(&target, &spec, &cfg.noise, 300, &mut r).unwrap();
            let part = partition(300, m, PartitionStrategy::Contiguous).unwrap();
            let lambda = cfg.lambda_for(300, m).unwrap();
            let gap = compare_estimators(&data, &part, lambda, &cfg.kernel, 50_000, 1).unwrap();
            let (k, rho) = (cell_k.samples[t], cell_rho.samples[t]);
            assert!((gap.k_dist - k).abs() <= 1e-6 * k, "m={m} t={t}: {} vs {k}", gap.k_dist);
            assert!((gap.rho_dist - rho).abs() <= 0.05 * rho, "m={m} t={t}: {} vs {rho}", gap.rho_dist);
        }
    }
}
