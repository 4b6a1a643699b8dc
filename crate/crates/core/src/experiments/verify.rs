//! Identity and concentration checks with pass/fail thresholds.
//!
//! Each check returns one or more [`CheckOutcome`]s; `verify-lemmas` writes
//! them as a table and fails when any of them does not pass.

use std::fmt::Write as _;

use faer::Mat;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::output::format_float;
use super::stats::fit_loglog_slope;
use crate::distributed::{fit_distributed, partition, PartitionStrategy};
use crate::error::Result;
use crate::kernels::KernelSpec;
use crate::krr::{self, rkhs_dist_sq, rkhs_norm_sq};
use crate::operator_lab::{
    approximation_error, approximation_error_rkhs, concentration_check, effective_dimension_empirical,
    effective_dimension_spectral, second_order_residual, verify_difference_representation,
};
use crate::rng;
use crate::synthetic::{make_source_target, make_spectral, sample_dataset, NoiseModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub check: String,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

impl CheckOutcome {
    /// Passes when `value ≤ threshold`.
    pub fn at_most(check: impl Into<String>, value: f64, threshold: f64) -> Self {
        CheckOutcome {
            check: check.into(),
            value,
            threshold,
            passed: value <= threshold,
        }
    }
}

/// Table as CSV: `check,value,threshold,passed`.
pub fn outcomes_csv(outcomes: &[CheckOutcome]) -> String {
    let mut out = String::from("check,value,threshold,passed\n");
    for o in outcomes {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            o.check,
            format_float(o.value),
            format_float(o.threshold),
            o.passed
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceCheck {
    pub enabled: bool,
    pub configs: usize,
    pub tolerance: f64,
}

impl Default for EquivalenceCheck {
    fn default() -> Self {
        EquivalenceCheck {
            enabled: true,
            configs: 10,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SecondOrderCheck {
    pub enabled: bool,
    pub pairs: usize,
    pub dim: usize,
    pub shift: f64,
    pub tolerance: f64,
}

impl Default for SecondOrderCheck {
    fn default() -> Self {
        SecondOrderCheck {
            enabled: true,
            pairs: 100,
            dim: 50,
            shift: 0.1,
            tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepresentationCheck {
    pub enabled: bool,
    pub configs: usize,
    pub n: usize,
    pub blocks: Vec<usize>,
    pub k_max: usize,
    pub tolerance: f64,
}

impl Default for RepresentationCheck {
    fn default() -> Self {
        RepresentationCheck {
            enabled: true,
            configs: 20,
            n: 60,
            blocks: vec![2, 3, 5],
            k_max: 30,
            tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EffectiveDimensionCheck {
    pub enabled: bool,
    pub s: u32,
    pub k_max: usize,
    pub n: usize,
    pub lambdas: Vec<f64>,
    pub relative_tolerance: f64,
    /// λ range for the spectral slope fit.
    pub slope_range: (f64, f64),
    pub slope_tolerance: f64,
}

impl Default for EffectiveDimensionCheck {
    fn default() -> Self {
        EffectiveDimensionCheck {
            enabled: true,
            s: 1,
            k_max: 2000,
            n: 2000,
            lambdas: vec![1e-1, 1e-2, 1e-3],
            relative_tolerance: 0.1,
            slope_range: (1e-4, 1e-2),
            slope_tolerance: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ApproximationCheck {
    pub enabled: bool,
    pub k_max: usize,
    pub grid: usize,
    pub lambda_range: (f64, f64),
    pub rs: Vec<f64>,
}

impl Default for ApproximationCheck {
    fn default() -> Self {
        ApproximationCheck {
            enabled: true,
            k_max: 500,
            grid: 20,
            lambda_range: (1e-4, 1e-1),
            rs: vec![0.5, 1.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConcentrationCheck {
    pub enabled: bool,
    pub k_max: usize,
    pub lambdas: Vec<f64>,
    pub ns: Vec<usize>,
    pub trials: usize,
    pub delta: f64,
    /// Allowed `|mean ‖(L_K+λ)^{-1/2}K_x‖² − 𝒩(λ)|` in standard errors.
    pub z_max: f64,
}

impl Default for ConcentrationCheck {
    fn default() -> Self {
        ConcentrationCheck {
            enabled: true,
            k_max: 50,
            lambdas: vec![1e-1, 1e-2, 1e-3],
            ns: vec![100, 500],
            trials: 500,
            delta: 0.05,
            z_max: 3.0,
        }
    }
}

/// Settings for the whole suite; every section is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyConfig {
    pub seed: u64,
    pub equivalence: EquivalenceCheck,
    pub second_order: SecondOrderCheck,
    pub representation: RepresentationCheck,
    pub effective_dimension: EffectiveDimensionCheck,
    pub approximation: ApproximationCheck,
    pub concentration: ConcentrationCheck,
}

/// Run every enabled check.
pub fn run_verification(cfg: &VerifyConfig) -> Result<Vec<CheckOutcome>> {
    let mut out = Vec::new();
    if cfg.equivalence.enabled {
        out.push(check_single_block(&cfg.equivalence, cfg.seed)?);
    }
    if cfg.second_order.enabled {
        out.push(check_second_order(&cfg.second_order, cfg.seed)?);
    }
    if cfg.representation.enabled {
        out.push(check_representation(&cfg.representation, cfg.seed)?);
    }
    if cfg.effective_dimension.enabled {
        out.extend(check_effective_dimension(&cfg.effective_dimension, cfg.seed)?);
    }
    if cfg.approximation.enabled {
        out.extend(check_approximation(&cfg.approximation, cfg.seed)?);
    }
    if cfg.concentration.enabled {
        out.extend(check_concentration(&cfg.concentration, cfg.seed)?);
    }
    Ok(out)
}

/// Random small problem shared by the estimator checks.
fn random_problem(k_max: usize, n: usize, seed: u64, index: u64) -> Result<(crate::synthetic::Dataset, KernelSpec, f64)> {
    let mut r = rng::stream(seed, &[0xec, index]);
    let s = r.random_range(1..=2u32);
    let kernel = KernelSpec::periodic_sobolev(s, k_max)?;
    let spec = make_spectral(&kernel)?;
    let target = make_source_target(&spec, r.random_range(0.3..=1.0), 1.0, index)?;
    let noise = NoiseModel::BoundedUniform {
        half_width: r.random_range(0.0..1.0),
    };
    let data = sample_dataset(&target, &spec, &noise, n, seed.wrapping_add(index))?;
    let lambda = 10f64.powf(r.random_range(-4.0..-0.5));
    Ok((data, kernel, lambda))
}

/// Worst `‖f̄ − f_{D,λ}‖_K / max(1, ‖f_{D,λ}‖_K)` with a single block.
pub fn check_single_block(cfg: &EquivalenceCheck, seed: u64) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for c in 0..cfg.configs {
        let mut r = rng::stream(seed, &[0xe1, c as u64]);
        let n = r.random_range(10..=80);
        let (data, kernel, lambda) = random_problem(r.random_range(5..=40), n, seed, 1000 + c as u64)?;
        let batch = krr::fit(&data, lambda, &kernel)?;
        let part = partition(n, 1, PartitionStrategy::Contiguous)?;
        let avg = fit_distributed(&data, &part, lambda, &kernel)?;
        let gap = rkhs_dist_sq(&avg.model, &batch)?.max(0.0).sqrt();
        let scale = rkhs_norm_sq(&batch)?.max(0.0).sqrt().max(1.0);
        worst = worst.max(gap / scale);
    }
    Ok(CheckOutcome::at_most("single_block_equivalence", worst, cfg.tolerance))
}

/// Random SPD matrix `Q diag(d) Qᵀ + shift·I` built from a Gaussian factor.
pub fn random_spd(dim: usize, shift: f64, rng: &mut rng::StreamRng) -> Mat<f64> {
    use rand_distr::{Distribution, StandardNormal};
    let f = Mat::<f64>::from_fn(dim, dim, |_, _| StandardNormal.sample(rng));
    let mut a = &f * f.transpose() * (1.0 / dim as f64);
    for i in 0..dim {
        a[(i, i)] += shift;
    }
    // exact symmetry
    for j in 0..dim {
        for i in 0..j {
            a[(i, j)] = a[(j, i)];
        }
    }
    a
}

/// Worst second-order expansion residual over random SPD pairs.
pub fn check_second_order(cfg: &SecondOrderCheck, seed: u64) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for p in 0..cfg.pairs {
        let mut r = rng::stream(seed, &[0x2d, p as u64]);
        let a = random_spd(cfg.dim, cfg.shift, &mut r);
        let b = random_spd(cfg.dim, cfg.shift, &mut r);
        worst = worst.max(second_order_residual(a.as_ref(), b.as_ref())?);
    }
    Ok(CheckOutcome::at_most("second_order_residual", worst, cfg.tolerance))
}

/// Worst discrepancy of the averaged-minus-batch representation.
pub fn check_representation(cfg: &RepresentationCheck, seed: u64) -> Result<CheckOutcome> {
    let mut worst: f64 = 0.0;
    for c in 0..cfg.configs {
        let m = cfg.blocks[c % cfg.blocks.len()];
        let mut r = rng::stream(seed, &[0x1e, c as u64]);
        let kernel = KernelSpec::periodic_sobolev(r.random_range(1..=2), cfg.k_max)?;
        let spec = make_spectral(&kernel)?;
        let target = make_source_target(&spec, r.random_range(0.3..=1.0), r.random_range(0.8..2.0), c as u64)?;
        let noise = NoiseModel::BoundedUniform {
            half_width: r.random_range(0.0..1.0),
        };
        let data = sample_dataset(&target, &spec, &noise, cfg.n, seed ^ (c as u64) << 8)?;
        let lambda = 10f64.powf(r.random_range(-2.0..0.0));
        let strategy = if c % 2 == 0 {
            PartitionStrategy::Contiguous
        } else {
            PartitionStrategy::Shuffled { seed: c as u64 }
        };
        let part = partition(cfg.n, m, strategy)?;
        worst = worst.max(verify_difference_representation(&data, &part, lambda, &kernel, &target, &spec)?);
    }
    Ok(CheckOutcome::at_most("difference_representation", worst, cfg.tolerance))
}

/// Log-spaced grid of `count` points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
        .collect()
}

/// Empirical vs spectral effective dimension, plus the spectral decay slope.
pub fn check_effective_dimension(cfg: &EffectiveDimensionCheck, seed: u64) -> Result<Vec<CheckOutcome>> {
    let kernel = KernelSpec::periodic_sobolev(cfg.s, cfg.k_max)?;
    let spec = make_spectral(&kernel)?;
    let mut r = rng::stream(seed, &[0xed, cfg.n as u64]);
    let x: Vec<f64> = (0..cfg.n).map(|_| r.random::<f64>()).collect();
    let gram = kernel.gram(&x)?;
    let mut out = Vec::new();
    for &lambda in &cfg.lambdas {
        let exact = effective_dimension_spectral(&spec, lambda)?;
        let emp = effective_dimension_empirical(gram.as_ref(), cfg.n, lambda)?;
        out.push(CheckOutcome::at_most(
            format!("effective_dimension_rel_err[lambda={lambda}]"),
            (emp - exact).abs() / exact,
            cfg.relative_tolerance,
        ));
    }
    let pts: Vec<(f64, f64)> = log_grid(cfg.slope_range.0, cfg.slope_range.1, 9)
        .into_iter()
        .map(|l| effective_dimension_spectral(&spec, l).map(|e| (l, e)))
        .collect::<Result<_>>()?;
    let fit = fit_loglog_slope(&pts)?;
    let target = -1.0 / (2.0 * cfg.s as f64);
    out.push(CheckOutcome::at_most(
        "effective_dimension_slope_err",
        (fit.slope - target).abs(),
        cfg.slope_tolerance,
    ));
    Ok(out)
}

/// Worst ratio of the approximation error to its bound, per norm and `r`.
pub fn check_approximation(cfg: &ApproximationCheck, seed: u64) -> Result<Vec<CheckOutcome>> {
    let kernel = KernelSpec::periodic_sobolev(1, cfg.k_max)?;
    let spec = make_spectral(&kernel)?;
    let mut out = Vec::new();
    for &r in &cfg.rs {
        let target = make_source_target(&spec, r, 1.0, seed)?;
        let (mut worst_rho, mut worst_k): (f64, f64) = (0.0, 0.0);
        for lambda in log_grid(cfg.lambda_range.0, cfg.lambda_range.1, cfg.grid) {
            let rho = approximation_error(&spec, &target, lambda)?;
            worst_rho = worst_rho.max(rho / (lambda.powf(r) * target.g_norm));
            if r >= 0.5 {
                let k = approximation_error_rkhs(&spec, &target, lambda)?;
                worst_k = worst_k.max(k / (lambda.powf(r - 0.5) * target.g_norm));
            }
        }
        out.push(CheckOutcome::at_most(format!("approximation_rho_ratio[r={r}]"), worst_rho, 1.0));
        if r >= 0.5 {
            out.push(CheckOutcome::at_most(format!("approximation_k_ratio[r={r}]"), worst_k, 1.0));
        }
    }
    Ok(out)
}

/// Expectation bound for the HS deviation and the mean of `‖(L_K+λ)^{-1/2}K_x‖²`.
pub fn check_concentration(cfg: &ConcentrationCheck, seed: u64) -> Result<Vec<CheckOutcome>> {
    let spec = make_spectral(&KernelSpec::periodic_sobolev(1, cfg.k_max)?)?;
    let mut out = Vec::new();
    for &lambda in &cfg.lambdas {
        for &n in &cfg.ns {
            let rep = concentration_check(&spec, lambda, n, cfg.trials, cfg.delta, seed)?;
            out.push(CheckOutcome::at_most(
                format!("hs_deviation_ratio[lambda={lambda},N={n}]"),
                rep.hs_sq_mean / rep.bound_a,
                1.0,
            ));
            out.push(CheckOutcome::at_most(
                format!("kx_norm_z[lambda={lambda},N={n}]"),
                rep.kx_norm_z(),
                cfg.z_max,
            ));
        }
    }
    Ok(out)
}
