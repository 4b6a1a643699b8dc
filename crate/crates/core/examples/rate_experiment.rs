//! A small convergence-rate experiment written to CSV and SVG.
//!
//! cargo run --release --example rate_experiment -- [out_dir]

use dac_krr::experiments::output::slopes_csv;
use dac_krr::experiments::{emit, parse_config, run_rate_experiment, ExperimentConfig, OutputFormat};

const CONFIG: &str = r#"
n_grid = [128, 256, 512, 1024]
trials = 8
seed = 1
metrics = ["batch_minus_target_rho", "avg_minus_target_rho", "avg_minus_batch_rho"]

[kernel]
kind = "periodic_sobolev"
s = 1
k_max = 500

[target]
r = 0.5

[noise]
kind = "bounded_uniform"
half_width = 1.0

[m]
rule = "fixed"
values = [2, 8]

[lambda]
rule = "minimax"
"#;

fn main() -> dac_krr::Result<()> {
    let cfg: ExperimentConfig = parse_config(CONFIG, true)?;
    let result = run_rate_experiment(&cfg)?;
    for row in result.rows() {
        println!("N={:<5} m={:<2} {:<24} {:.5} ± {:.5}", row.n, row.m, row.metric, row.mean, row.stderr);
    }
    print!("{}", slopes_csv(&result));

    let out = std::env::args().nth(1).unwrap_or_else(|| "rate_experiment_out".into());
    std::fs::create_dir_all(&out)?;
    emit(&result, OutputFormat::Csv, format!("{out}/rates.csv"))?;
    emit(&result, OutputFormat::Svg, format!("{out}/rates.svg"))?;
    println!("wrote {out}/rates.csv and {out}/rates.svg");
    Ok(())
}
