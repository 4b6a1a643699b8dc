//! The `dac-krr` command line.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 configuration or usage error,
//! 3 numeric failure, 4 a `verify-lemmas` check did not pass.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::distributed::{fit_distributed, partition, PartitionStrategy};
use crate::error::{Error, Result};
use crate::experiments::output::{format_float, slopes_csv};
use crate::experiments::verify::{outcomes_csv, run_verification, VerifyConfig};
use crate::experiments::{
    emit, load_config, monotonicity_report, run_rate_experiment_with_workers, ExperimentConfig, MSchedule, OutputFormat,
};
use crate::kernels::KernelSpec;
use crate::krr::{self, rkhs_norm_sq};
use crate::operator_lab::{effective_dimension_empirical, effective_dimension_spectral};
use crate::rng::{self, purpose};
use crate::synthetic::{make_source_target, make_spectral, sample_dataset, Dataset, NoiseModel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_CHECK_FAILED: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "dac-krr", version, about = "Divide-and-conquer kernel ridge regression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit the single-machine estimator.
    Solve(ConfigArgs),
    /// Fit the averaged estimator over m blocks.
    Distribute(DistributeArgs),
    /// Effective dimension on a λ grid, spectral and empirical.
    Effdim(ConfigArgs),
    /// Run the identity and concentration checks; exits 4 if any fails.
    VerifyLemmas(VerifyArgs),
    /// Run a convergence-rate experiment.
    RateExperiment(RateArgs),
}

#[derive(Debug, Args)]
struct ConfigArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Optional; every check has defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct RateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; results do not depend on this.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Contiguous,
    Shuffled,
}

#[derive(Debug, Args)]
struct DistributeArgs {
    /// Config file; flags given alongside it take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV with columns x,y.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Kernel as inline JSON, e.g. '{"kind":"gaussian","bandwidth":0.2}', or a path to a JSON file.
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long, value_enum)]
    strategy: Option<StrategyArg>,
    #[arg(long)]
    seed: Option<u64>,
    /// A `.csv` path for the model, or a directory.
    #[arg(long)]
    out: PathBuf,
}

/// Where training data comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Csv {
        path: PathBuf,
    },
    /// Draw from a source-condition target of the configured periodic kernel.
    Synthetic {
        n: usize,
        r: f64,
        #[serde(default = "one")]
        decay: f64,
        #[serde(default)]
        target_seed: u64,
        noise: NoiseModel,
        #[serde(default)]
        seed: u64,
    },
}

fn one() -> f64 {
    1.0
}

impl DataSource {
    /// Load or generate the dataset. Relative CSV paths resolve against `base`.
    pub fn load(&self, kernel: &KernelSpec, base: &Path) -> Result<Dataset> {
        match self {
            DataSource::Csv { path } => Dataset::read_csv(base.join(path)),
            DataSource::Synthetic {
                n,
                r,
                decay,
                target_seed,
                noise,
                seed,
            } => {
                let spec = make_spectral(kernel)?;
                let target = make_source_target(&spec, *r, *decay, *target_seed)?;
                sample_dataset(&target, &spec, noise, *n, *seed)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub data: DataSource,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributeConfig {
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub m: usize,
    pub data: DataSource,
    #[serde(default = "contiguous")]
    pub strategy: PartitionStrategy,
}

fn contiguous() -> PartitionStrategy {
    PartitionStrategy::Contiguous
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EffdimConfig {
    pub kernel: KernelSpec,
    pub lambdas: Vec<f64>,
    /// Sample size for the empirical estimate; omitted means spectral only.
    #[serde(default)]
    pub empirical_n: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

/// Run with the process arguments and return the exit code.
pub fn run() -> i32 {
    run_from(std::env::args_os())
}

/// Run with explicit arguments (the first is the program name).
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve(a) => solve(&a),
        Command::Distribute(a) => distribute(&a),
        Command::Effdim(a) => effdim(&a),
        Command::VerifyLemmas(a) => verify(&a),
        Command::RateExperiment(a) => rate(&a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Map an error to the documented exit code.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else if matches!(e, Error::Io(_)) {
        EXIT_IO
    } else {
        EXIT_CONFIG
    }
}

/// Errors raised while reading inputs are configuration errors, whatever their kind.
fn as_config(e: Error) -> Error {
    match e {
        Error::Io(io) => Error::Config(io.to_string()),
        Error::Csv(c) => Error::Config(c.to_string()),
        Error::Json(j) => Error::Config(j.to_string()),
        other => other,
    }
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text)?;
    Ok(())
}

fn solve(a: &ConfigArgs) -> Result<i32> {
    let cfg: SolveConfig = load_config(&a.config)?;
    let data = cfg.data.load(&cfg.kernel, &config_dir(&a.config)).map_err(as_config)?;
    let model = krr::fit(&data, cfg.lambda, &cfg.kernel)?;
    std::fs::create_dir_all(&a.out)?;
    model.write_csv(a.out.join("model.csv"))?;
    if matches!(cfg.data, DataSource::Synthetic { .. }) {
        data.write_csv(a.out.join("data.csv"))?;
    }
    let norm = rkhs_norm_sq(&model)?.max(0.0).sqrt();
    let summary = serde_json::json!({
        "n": data.len(),
        "lambda": cfg.lambda,
        "rkhs_norm": norm,
    });
    write(&a.out.join("summary.json"), &format!("{summary:#}\n"))?;
    println!("fit N={} lambda={} ‖f‖_K={norm:.6e}", data.len(), cfg.lambda);
    Ok(EXIT_OK)
}

fn parse_kernel_arg(arg: &str) -> Result<KernelSpec> {
    let text = if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        std::fs::read_to_string(arg).map_err(|e| Error::Config(format!("cannot read kernel file {arg}: {e}")))?
    };
    let kernel: KernelSpec =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("bad kernel JSON: {e}")))?;
    kernel.validate().map_err(|e| Error::Config(e.to_string()))?;
    Ok(kernel)
}

fn distribute(a: &DistributeArgs) -> Result<i32> {
    let base: Option<DistributeConfig> = a.config.as_ref().map(load_config).transpose()?;
    let missing = |what: &str| Error::Config(format!("--{what} is required without --config"));
    let kernel = match (&a.kernel, &base) {
        (Some(k), _) => parse_kernel_arg(k)?,
        (None, Some(c)) => c.kernel,
        (None, None) => return Err(missing("kernel")),
    };
    let lambda = a.lambda.or(base.as_ref().map(|c| c.lambda)).ok_or_else(|| missing("lambda"))?;
    let m = a.m.or(base.as_ref().map(|c| c.m)).ok_or_else(|| missing("m"))?;
    let strategy = match (a.strategy, a.seed) {
        (Some(StrategyArg::Contiguous), _) => PartitionStrategy::Contiguous,
        (Some(StrategyArg::Shuffled), seed) => PartitionStrategy::Shuffled { seed: seed.unwrap_or(0) },
        (None, seed) => match (base.as_ref().map(|c| c.strategy), seed) {
            (Some(PartitionStrategy::Shuffled { .. }), Some(s)) => PartitionStrategy::Shuffled { seed: s },
            (Some(s), _) => s,
            (None, _) => PartitionStrategy::Contiguous,
        },
    };
    let data = match (&a.data, &base, &a.config) {
        (Some(path), _, _) => Dataset::read_csv(path),
        (None, Some(c), Some(cfg_path)) => c.data.load(&kernel, &config_dir(cfg_path)),
        _ => return Err(missing("data")),
    }
    .map_err(as_config)?;

    let part = partition(data.len(), m, strategy).map_err(|e| Error::Config(e.to_string()))?;
    let avg = fit_distributed(&data, &part, lambda, &kernel)?;
    let (model_path, dir) = if a.out.extension().is_some_and(|e| e == "csv") {
        (a.out.clone(), None)
    } else {
        std::fs::create_dir_all(&a.out)?;
        (a.out.join("model.csv"), Some(a.out.clone()))
    };
    if let Some(parent) = model_path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    avg.model.write_csv(&model_path)?;
    if let Some(dir) = dir {
        let summary = serde_json::json!({
            "n": data.len(),
            "m": m,
            "lambda": lambda,
            "block_sizes": avg.block_sizes,
            "weights": avg.weights,
        });
        write(&dir.join("summary.json"), &format!("{summary:#}\n"))?;
    }
    println!(
        "averaged {m} blocks (sizes {:?}) N={} lambda={lambda} -> {}",
        avg.block_sizes,
        data.len(),
        model_path.display()
    );
    Ok(EXIT_OK)
}

fn effdim(a: &ConfigArgs) -> Result<i32> {
    let cfg: EffdimConfig = load_config(&a.config)?;
    let spec = make_spectral(&cfg.kernel).map_err(as_config)?;
    if cfg.lambdas.is_empty() {
        return Err(Error::Config("lambdas must be non-empty".into()));
    }
    let gram = match cfg.empirical_n {
        Some(n) => {
            use rand::Rng;
            let mut r = rng::stream(cfg.seed, &[purpose::DATA, n as u64]);
            let x: Vec<f64> = (0..n).map(|_| r.random::<f64>()).collect();
            Some((n, cfg.kernel.gram(&x)?))
        }
        None => None,
    };
    let mut csv = String::from("lambda,spectral,empirical\n");
    for &lambda in &cfg.lambdas {
        let exact = effective_dimension_spectral(&spec, lambda).map_err(as_config)?;
        let emp = match &gram {
            Some((n, g)) => format_float(effective_dimension_empirical(g.as_ref(), *n, lambda)?),
            None => String::new(),
        };
        let _ = writeln!(csv, "{},{},{emp}", format_float(lambda), format_float(exact));
    }
    std::fs::create_dir_all(&a.out)?;
    write(&a.out.join("effdim.csv"), &csv)?;
    print!("{csv}");
    Ok(EXIT_OK)
}

fn verify(a: &VerifyArgs) -> Result<i32> {
    let cfg: VerifyConfig = match &a.config {
        Some(p) => load_config(p)?,
        None => VerifyConfig::default(),
    };
    let outcomes = run_verification(&cfg)?;
    let csv = outcomes_csv(&outcomes);
    std::fs::create_dir_all(&a.out)?;
    write(&a.out.join("verify.csv"), &csv)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    for o in &outcomes {
        println!(
            "{} {:<45} {:>12.4e} (threshold {:.1e})",
            if o.passed { "PASS" } else { "FAIL" },
            o.check,
            o.value,
            o.threshold
        );
    }
    if failed > 0 {
        eprintln!("{failed} of {} checks failed", outcomes.len());
        Ok(EXIT_CHECK_FAILED)
    } else {
        Ok(EXIT_OK)
    }
}

fn rate(a: &RateArgs) -> Result<i32> {
    let cfg: ExperimentConfig = load_config(&a.config)?;
    cfg.validate()?;
    let workers = a
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let result = run_rate_experiment_with_workers(&cfg, workers)?;
    std::fs::create_dir_all(&a.out)?;
    emit(&result, OutputFormat::Csv, a.out.join("rates.csv"))?;
    emit(&result, OutputFormat::Svg, a.out.join("rates.svg"))?;
    write(&a.out.join("slopes.csv"), &slopes_csv(&result))?;

    if let MSchedule::Fixed { values } = &cfg.m {
        if values.len() > 1 {
            let mut text = String::from("N,metric,m_from,m_to,drop,pooled_stderr,paired_stderr,significant\n");
            for &n in &cfg.n_grid {
                for metric in &cfg.metrics {
                    for s in monotonicity_report(&result, *metric, n) {
                        let _ = writeln!(
                            text,
                            "{n},{metric},{},{},{},{},{},{}",
                            s.m_from,
                            s.m_to,
                            format_float(s.drop),
                            format_float(s.pooled_stderr),
                            format_float(s.paired_stderr),
                            s.significant
                        );
                    }
                }
            }
            write(&a.out.join("monotonicity.csv"), &text)?;
        }
    }
    for f in &result.fits {
        match &f.fit {
            Some(fit) => println!("{} {}: slope {:.4} ± {:.4}", f.metric, f.series, fit.slope, fit.stderr),
            None => println!("{} {}: no fit (fewer than 3 positive means)", f.metric, f.series),
        }
    }
    Ok(EXIT_OK)
}
