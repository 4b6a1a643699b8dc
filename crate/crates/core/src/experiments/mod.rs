//! Rate experiments: λ and block-count schedules, the trial runner, slope fits and output.

pub mod config;
pub mod output;
pub mod rules;
pub mod runner;
pub mod stats;
pub mod verify;

pub use config::{load_config, parse_config, BlockLayout, ExperimentConfig, LambdaSchedule, MSchedule, Metric, RhoNorm, TargetConfig};
pub use output::{emit, parse_csv, OutputFormat};
pub use rules::{lambda_rule, m_restriction, m_restriction_exponent, LambdaRule, MRestriction};
pub use runner::{
    monotonicity_report, run_rate_experiment, run_rate_experiment_with_workers, MonotoneStep, RateCell, RateResult,
    RateRow, SeriesFit,
};
pub use stats::{fit_loglog_slope, mean_stderr, LogLogFit};
