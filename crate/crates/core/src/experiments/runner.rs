//! Trial loop for rate experiments.
//!
//! One job is an `(N, trial)` cell. It draws one dataset and evaluates every
//! block count of the schedule on it, so comparisons across `m` share their
//! randomness. Jobs run on a dedicated thread pool; results are collected in
//! job order and summed in trial order, so the output does not depend on the
//! number of workers.

use faer::{Mat, MatRef};
use rayon::prelude::*;
use serde::Serialize;

use super::config::{BlockLayout, ExperimentConfig, Metric, RhoNorm};
use super::stats::{fit_loglog_slope, mean_stderr, LogLogFit};
use crate::distributed::{partition, PartitionStrategy};
use crate::error::{Error, Result};
use crate::linalg::{norm, outer_gram, solve_shifted_spd, transpose_mat_vec};
use crate::rng::{self, purpose};
use crate::synthetic::{make_source_target, make_spectral, sample_dataset_with, SpectralModel, TargetFunction};

/// One output line: the mean of `metric` over the trials at `(N, m)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub m: usize,
    pub lambda: f64,
    pub metric: String,
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

/// A row together with the per-trial values behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCell {
    pub row: RateRow,
    /// Which block-count series the row belongs to (see [`ExperimentConfig::series_label`]).
    pub series: String,
    /// Metric values in trial order.
    pub samples: Vec<f64>,
}

/// Log-log slope of a metric against `N` along one series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesFit {
    pub metric: String,
    pub series: String,
    /// `None` when fewer than three positive means are available.
    pub fit: Option<LogLogFit>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RateResult {
    pub cells: Vec<RateCell>,
    pub fits: Vec<SeriesFit>,
}

impl RateResult {
    pub fn rows(&self) -> impl Iterator<Item = &RateRow> {
        self.cells.iter().map(|c| &c.row)
    }

    pub fn cell(&self, n: usize, m: usize, metric: Metric) -> Option<&RateCell> {
        self.cells
            .iter()
            .find(|c| c.row.n == n && c.row.m == m && c.row.metric == metric.name())
    }

    pub fn fit(&self, metric: Metric, series: &str) -> Option<&LogLogFit> {
        self.fits
            .iter()
            .find(|f| f.metric == metric.name() && f.series == series)
            .and_then(|f| f.fit.as_ref())
    }
}

/// Run on the current rayon pool.
pub fn run_rate_experiment(config: &ExperimentConfig) -> Result<RateResult> {
    config.validate()?;
    let setup = Setup::new(config)?;
    let jobs: Vec<(usize, usize)> = (0..config.n_grid.len())
        .flat_map(|i| (0..config.trials).map(move |t| (i, t)))
        .collect();
    let outputs: Vec<JobOutput> = jobs
        .par_iter()
        .map(|&(i, t)| setup.run_job(config.n_grid[i], t))
        .collect::<Result<_>>()?;
    Ok(assemble(config, &jobs, outputs))
}

/// Run on a fresh pool with `workers` threads.
pub fn run_rate_experiment_with_workers(config: &ExperimentConfig, workers: usize) -> Result<RateResult> {
    if workers == 0 {
        return Err(Error::Config("workers must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_rate_experiment(config))
}

/// Per-m metric values of one job: `values[series][metric]`.
struct JobOutput {
    lambdas: Vec<f64>,
    ms: Vec<usize>,
    values: Vec<Vec<f64>>,
}

struct Setup<'a> {
    config: &'a ExperimentConfig,
    spec: SpectralModel,
    target: TargetFunction,
    sqrt_mu: Vec<f64>,
    need_batch: bool,
    need_average: bool,
}

impl<'a> Setup<'a> {
    fn new(config: &'a ExperimentConfig) -> Result<Self> {
        let spec = make_spectral(&config.kernel)?;
        let target = make_source_target(&spec, config.target.r, config.target.decay, config.target.seed)?;
        let sqrt_mu = spec.eigenvalues().iter().map(|m| m.sqrt()).collect();
        Ok(Setup {
            config,
            need_batch: config.metrics.iter().any(|m| m.needs_batch()),
            need_average: config.metrics.iter().any(|m| m.needs_average()),
            spec,
            target,
            sqrt_mu,
        })
    }

    fn run_job(&self, n: usize, trial: usize) -> Result<JobOutput> {
        let cfg = self.config;
        let ms = cfg.block_counts(n)?;
        let tag = |e: Error, m: usize| Error::Trial {
            n,
            m,
            trial,
            source: Box::new(e),
        };
        let first_m = ms[0];

        let mut rng = rng::stream(cfg.seed, &[purpose::DATA, n as u64, trial as u64]);
        let data = sample_dataset_with(&self.target, &self.spec, &cfg.noise, n, &mut rng).map_err(|e| tag(e, first_m))?;
        let features = cfg.kernel.feature_matrix(&data.x).map_err(|e| tag(e, first_m))?;
        let gram = self.need_batch.then(|| outer_gram(features.as_ref()));
        let probe = match cfg.rho_norm {
            RhoNorm::MonteCarlo => Some(self.test_basis(n, trial)),
            RhoNorm::Exact => None,
        };

        let mut lambdas = Vec::with_capacity(ms.len());
        let mut values = Vec::with_capacity(ms.len());
        // the batch fit only depends on λ
        let mut batch_cache: Vec<(f64, Vec<f64>)> = Vec::new();
        for &m in &ms {
            let lambda = cfg.lambda_for(n, m).map_err(|e| tag(e, m))?;
            let batch_phi = if self.need_batch {
                match batch_cache.iter().find(|(l, _)| l.to_bits() == lambda.to_bits()) {
                    Some((_, phi)) => Some(phi.clone()),
                    None => {
                        let g = gram.as_ref().expect("gram computed when a batch metric is requested");
                        let alpha = solve_shifted_spd(g.clone(), n as f64 * lambda, &data.y).map_err(|e| tag(e, m))?;
                        let phi = transpose_mat_vec(features.as_ref(), &alpha);
                        batch_cache.push((lambda, phi.clone()));
                        Some(phi)
                    }
                }
            } else {
                None
            };
            let avg_phi = if self.need_average {
                let alpha = self
                    .averaged_coefficients(&data.y, features.as_ref(), gram.as_ref(), n, m, trial, lambda)
                    .map_err(|e| tag(e, m))?;
                Some(transpose_mat_vec(features.as_ref(), &alpha))
            } else {
                None
            };
            values.push(self.metrics(batch_phi.as_deref(), avg_phi.as_deref(), probe.as_ref()));
            lambdas.push(lambda);
        }
        Ok(JobOutput { lambdas, ms, values })
    }

    /// Coefficients of `f̄` on the full sample: `w_j α⁽ʲ⁾` on block `j`.
    #[allow(clippy::too_many_arguments)]
    fn averaged_coefficients(
        &self,
        y: &[f64],
        features: MatRef<'_, f64>,
        gram: Option<&Mat<f64>>,
        n: usize,
        m: usize,
        trial: usize,
        lambda: f64,
    ) -> Result<Vec<f64>> {
        let strategy = match self.config.blocks {
            BlockLayout::Contiguous => PartitionStrategy::Contiguous,
            BlockLayout::Shuffled => PartitionStrategy::Shuffled {
                seed: self.config.seed ^ ((trial as u64) << 32) ^ m as u64,
            },
        };
        let part = partition(n, m, strategy)?;
        let mut coefficients = vec![0.0; n];
        for (j, (block, &w)) in part.blocks.iter().zip(&part.weights).enumerate() {
            let local_gram = match gram {
                Some(g) => Mat::from_fn(block.len(), block.len(), |a, b| g[(block[a], block[b])]),
                None => {
                    let rows = Mat::from_fn(block.len(), features.ncols(), |a, l| features[(block[a], l)]);
                    outer_gram(rows.as_ref())
                }
            };
            let local_y: Vec<f64> = block.iter().map(|&i| y[i]).collect();
            let alpha = solve_shifted_spd(local_gram, block.len() as f64 * lambda, &local_y).map_err(|e| e.in_block(j))?;
            for (&i, a) in block.iter().zip(alpha) {
                coefficients[i] = w * a;
            }
        }
        Ok(coefficients)
    }

    /// Orthonormal basis evaluated at this job's test points (`n_test × d`).
    fn test_basis(&self, n: usize, trial: usize) -> Mat<f64> {
        use rand::Rng;
        let cfg = self.config;
        let mut rng = rng::stream(cfg.seed, &[purpose::TEST_POINTS, n as u64, trial as u64]);
        let d = self.spec.dim();
        let mut e = Mat::<f64>::zeros(cfg.n_test, d);
        let mut row = vec![0.0; d];
        for i in 0..cfg.n_test {
            self.spec.basis_at(rng.random::<f64>(), &mut row);
            for (l, v) in row.iter().enumerate() {
                e[(i, l)] = *v;
            }
        }
        e
    }

    fn metrics(&self, batch_phi: Option<&[f64]>, avg_phi: Option<&[f64]>, probe: Option<&Mat<f64>>) -> Vec<f64> {
        // e-basis coefficients: c_ℓ = √μ_ℓ · (φ-coordinate)_ℓ
        let to_basis = |phi: &[f64]| -> Vec<f64> { phi.iter().zip(&self.sqrt_mu).map(|(b, s)| b * s).collect() };
        let batch = batch_phi.map(to_basis);
        let avg = avg_phi.map(to_basis);
        let target = &self.target.coefficients;
        let sub = |a: &[f64], b: &[f64]| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x - y).collect() };
        let rho = |diff: Vec<f64>| -> f64 {
            match probe {
                None => norm(&diff),
                Some(e) => {
                    let values = crate::linalg::mat_vec(e.as_ref(), &diff);
                    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
                }
            }
        };
        self.config
            .metrics
            .iter()
            .map(|metric| match metric {
                Metric::AvgMinusBatchRho => rho(sub(avg.as_ref().unwrap(), batch.as_ref().unwrap())),
                Metric::AvgMinusBatchK => norm(&sub(avg_phi.unwrap(), batch_phi.unwrap())),
                Metric::BatchMinusTargetRho => rho(sub(batch.as_ref().unwrap(), target)),
                Metric::AvgMinusTargetRho => rho(sub(avg.as_ref().unwrap(), target)),
            })
            .collect()
    }
}

fn assemble(config: &ExperimentConfig, jobs: &[(usize, usize)], outputs: Vec<JobOutput>) -> RateResult {
    let mut cells = Vec::new();
    for (i, &n) in config.n_grid.iter().enumerate() {
        let mine: Vec<&JobOutput> = jobs
            .iter()
            .zip(&outputs)
            .filter(|((ji, _), _)| *ji == i)
            .map(|(_, o)| o)
            .collect();
        let first = mine[0];
        for (s, (&m, &lambda)) in first.ms.iter().zip(&first.lambdas).enumerate() {
            for (k, metric) in config.metrics.iter().enumerate() {
                let samples: Vec<f64> = mine.iter().map(|o| o.values[s][k]).collect();
                let (mean, stderr) = mean_stderr(&samples);
                cells.push(RateCell {
                    row: RateRow {
                        n,
                        m,
                        lambda,
                        metric: metric.name().to_string(),
                        mean,
                        stderr,
                        trials: samples.len(),
                    },
                    series: config.series_label(s),
                    samples,
                });
            }
        }
    }
    let series_count = config.block_counts(config.n_grid[0]).map(|v| v.len()).unwrap_or(0);
    let mut fits = Vec::new();
    for metric in &config.metrics {
        for s in 0..series_count {
            let label = config.series_label(s);
            let points: Vec<(f64, f64)> = cells
                .iter()
                .filter(|c| c.series == label && c.row.metric == metric.name())
                .map(|c| (c.row.n as f64, c.row.mean))
                .collect();
            fits.push(SeriesFit {
                metric: metric.name().to_string(),
                series: label,
                fit: fit_loglog_slope(&points).ok(),
            });
        }
    }
    RateResult { cells, fits }
}

/// One step of the monotonicity check between consecutive block counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneStep {
    pub m_from: usize,
    pub m_to: usize,
    /// `mean(m_from) − mean(m_to)`; positive when the metric decreases.
    pub drop: f64,
    /// `√(se_from² + se_to²)`
    pub pooled_stderr: f64,
    /// Standard error of the mean per-trial difference.
    pub paired_stderr: f64,
    /// One-sided paired test for a decrease at the 5% level (`z > 1.645`).
    pub significant: bool,
}

/// Consecutive-`m` comparison of `metric` at sample size `n`, in increasing `m`.
pub fn monotonicity_report(result: &RateResult, metric: Metric, n: usize) -> Vec<MonotoneStep> {
    let mut cells: Vec<&RateCell> = result
        .cells
        .iter()
        .filter(|c| c.row.n == n && c.row.metric == metric.name())
        .collect();
    cells.sort_by_key(|c| c.row.m);
    cells
        .windows(2)
        .map(|w| {
            let (a, b) = (w[0], w[1]);
            let diffs: Vec<f64> = a.samples.iter().zip(&b.samples).map(|(x, y)| x - y).collect();
            let (mean_diff, paired_stderr) = mean_stderr(&diffs);
            MonotoneStep {
                m_from: a.row.m,
                m_to: b.row.m,
                drop: a.row.mean - b.row.mean,
                pooled_stderr: a.row.stderr.hypot(b.row.stderr),
                paired_stderr,
                significant: mean_diff > 1.645 * paired_stderr,
            }
        })
        .collect()
}
