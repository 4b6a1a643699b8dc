//! Experiment configuration (JSON or TOML).

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::rules::{floor_power, lambda_rule, m_restriction, LambdaRule, MRestriction};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::synthetic::NoiseModel;

/// Read a config file; `.toml` files are parsed as TOML, everything else as JSON.
pub fn load_config<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, path.extension().and_then(|e| e.to_str()) == Some("toml"))
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Parse config text in either surface syntax.
pub fn parse_config<T: DeserializeOwned>(text: &str, toml: bool) -> Result<T> {
    if toml {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    } else {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// The regression function `f_ρ = L_K^r g_ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetConfig {
    pub r: f64,
    #[serde(default = "default_decay")]
    pub decay: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_decay() -> f64 {
    1.0
}

/// How many blocks to use at each sample size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum MSchedule {
    /// The same list of block counts at every `N`.
    Fixed { values: Vec<usize> },
    /// `m = ⌊N^exponent⌋`.
    Power { exponent: f64 },
    /// The largest admissible `m` under a named restriction.
    Restriction { restriction: MRestriction },
}

/// How λ depends on `N` and `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaSchedule {
    BlockRatio,
    Minimax,
    DistributedMinimax,
    Fixed { value: f64 },
    /// `λ = scale · N^{-exponent}`.
    Power { scale: f64, exponent: f64 },
}

/// Quantities recorded per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// `‖f̄_{D,λ} − f_{D,λ}‖_ρ`
    AvgMinusBatchRho,
    /// `‖f̄_{D,λ} − f_{D,λ}‖_K`
    AvgMinusBatchK,
    /// `‖f_{D,λ} − f_ρ‖_ρ`
    BatchMinusTargetRho,
    /// `‖f̄_{D,λ} − f_ρ‖_ρ`
    AvgMinusTargetRho,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Metric::AvgMinusBatchRho,
        Metric::AvgMinusBatchK,
        Metric::BatchMinusTargetRho,
        Metric::AvgMinusTargetRho,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AvgMinusBatchRho => "avg_minus_batch_rho",
            Metric::AvgMinusBatchK => "avg_minus_batch_k",
            Metric::BatchMinusTargetRho => "batch_minus_target_rho",
            Metric::AvgMinusTargetRho => "avg_minus_target_rho",
        }
    }

    pub(crate) fn needs_batch(self) -> bool {
        !matches!(self, Metric::AvgMinusTargetRho)
    }

    pub(crate) fn needs_average(self) -> bool {
        !matches!(self, Metric::BatchMinusTargetRho)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::arg(format!("unknown metric {s:?}")))
    }
}

/// How `‖·‖_ρ` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RhoNorm {
    /// Root mean square over `n_test` fresh uniform test points.
    #[default]
    MonteCarlo,
    /// Euclidean norm of the coefficients in the orthonormal basis.
    Exact,
}

/// Block assignment for the averaged estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockLayout {
    #[default]
    Contiguous,
    Shuffled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kernel: KernelSpec,
    pub target: TargetConfig,
    pub noise: NoiseModel,
    pub n_grid: Vec<usize>,
    pub m: MSchedule,
    pub lambda: LambdaSchedule,
    #[serde(default = "default_metrics")]
    pub metrics: Vec<Metric>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub rho_norm: RhoNorm,
    #[serde(default)]
    pub blocks: BlockLayout,
    /// Eigenvalue decay exponent for the λ and m rules; defaults to the kernel's `s`.
    #[serde(default)]
    pub alpha: Option<f64>,
}

fn default_metrics() -> Vec<Metric> {
    vec![Metric::AvgMinusBatchRho, Metric::AvgMinusTargetRho]
}

fn default_trials() -> usize {
    20
}

fn default_n_test() -> usize {
    2000
}

impl ExperimentConfig {
    pub fn alpha(&self) -> f64 {
        match (self.alpha, self.kernel) {
            (Some(a), _) => a,
            (None, KernelSpec::PeriodicSobolev { s, .. }) => s as f64,
            (None, KernelSpec::Gaussian { .. }) => f64::NAN,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if !matches!(self.kernel, KernelSpec::PeriodicSobolev { .. }) {
            return bad("rate experiments need a periodic_sobolev kernel".into());
        }
        self.kernel.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.noise.validate().map_err(|e| Error::Config(e.to_string()))?;
        if !(self.target.r > 0.0 && self.target.r <= 1.0) {
            return bad(format!("target.r must lie in (0, 1], got {}", self.target.r));
        }
        if !(self.target.decay > 0.5 && self.target.decay.is_finite()) {
            return bad(format!("target.decay must exceed 1/2, got {}", self.target.decay));
        }
        if self.n_grid.is_empty() || self.n_grid[0] == 0 {
            return bad("n_grid must be non-empty with positive entries".into());
        }
        if self.n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("n_grid must be strictly increasing, got {:?}", self.n_grid));
        }
        if self.trials < 3 {
            return bad(format!("trials must be at least 3, got {}", self.trials));
        }
        if self.metrics.is_empty() {
            return bad("at least one metric is required".into());
        }
        if self.rho_norm == RhoNorm::MonteCarlo && self.n_test == 0 {
            return bad("n_test must be positive".into());
        }
        let alpha = self.alpha();
        if !(alpha > 0.0 && alpha.is_finite()) {
            return bad(format!("alpha must be positive, got {alpha}"));
        }
        match &self.m {
            MSchedule::Fixed { values } => {
                if values.is_empty() {
                    return bad("m.values must be non-empty".into());
                }
                let mut sorted = values.clone();
                sorted.sort_unstable();
                sorted.dedup();
                if sorted.len() != values.len() {
                    return bad(format!("m.values contains duplicates: {values:?}"));
                }
            }
            MSchedule::Power { exponent } => {
                if !(exponent.is_finite() && *exponent >= 0.0 && *exponent <= 1.0) {
                    return bad(format!("m.exponent must lie in [0, 1], got {exponent}"));
                }
            }
            MSchedule::Restriction { .. } => {}
        }
        match self.lambda {
            LambdaSchedule::Fixed { value } if !(value > 0.0 && value.is_finite()) => {
                return bad(format!("lambda.value must be positive, got {value}"));
            }
            LambdaSchedule::Power { scale, exponent } if !(scale > 0.0 && scale.is_finite() && exponent.is_finite()) => {
                return bad(format!("invalid lambda power rule: scale {scale}, exponent {exponent}"));
            }
            _ => {}
        }
        for &n in &self.n_grid {
            for m in self.block_counts(n).map_err(|e| Error::Config(e.to_string()))? {
                if m == 0 || m > n {
                    return bad(format!("m = {m} is not in 1..=N for N = {n}"));
                }
                self.lambda_for(n, m).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Block counts evaluated at `n`, in schedule order.
    pub fn block_counts(&self, n: usize) -> Result<Vec<usize>> {
        Ok(match &self.m {
            MSchedule::Fixed { values } => values.clone(),
            MSchedule::Power { exponent } => vec![floor_power(n, *exponent)],
            MSchedule::Restriction { restriction } => vec![m_restriction(*restriction, n, self.alpha(), self.target.r)?],
        })
    }

    /// Label of the `i`-th series of block counts, stable across `N`.
    pub fn series_label(&self, i: usize) -> String {
        match &self.m {
            MSchedule::Fixed { values } => format!("m={}", values[i]),
            MSchedule::Power { exponent } => format!("m=N^{exponent}"),
            MSchedule::Restriction { restriction } => format!("m={restriction}"),
        }
    }

    pub fn lambda_for(&self, n: usize, m: usize) -> Result<f64> {
        let (alpha, r) = (self.alpha(), self.target.r);
        let lambda = match self.lambda {
            LambdaSchedule::BlockRatio => lambda_rule(LambdaRule::BlockRatio, n, m, alpha, r)?,
            LambdaSchedule::Minimax => lambda_rule(LambdaRule::Minimax, n, m, alpha, r)?,
            LambdaSchedule::DistributedMinimax => lambda_rule(LambdaRule::DistributedMinimax, n, m, alpha, r)?,
            LambdaSchedule::Fixed { value } => value,
            LambdaSchedule::Power { scale, exponent } => scale * (n as f64).powf(-exponent),
        };
        Ok(lambda)
    }
}
