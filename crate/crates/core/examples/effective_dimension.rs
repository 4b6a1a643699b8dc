//! Effective dimension: exact spectral sum against the empirical Gram estimate.
//!
//! cargo run --release --example effective_dimension

use dac_krr::experiments::fit_loglog_slope;
use dac_krr::operator_lab::{effective_dimension_empirical, effective_dimension_spectral};
use dac_krr::{make_spectral, KernelSpec};
use rand::Rng;

fn main() -> dac_krr::Result<()> {
    let kernel = KernelSpec::periodic_sobolev(1, 1000)?;
    let spec = make_spectral(&kernel)?;
    let n = 1000;
    let mut rng = dac_krr::rng::stream(1, &[n as u64]);
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let gram = kernel.gram(&x)?;

    println!("{:>8} {:>10} {:>10}", "lambda", "spectral", "empirical");
    let mut pts = Vec::new();
    for lambda in [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4] {
        let exact = effective_dimension_spectral(&spec, lambda)?;
        let emp = effective_dimension_empirical(gram.as_ref(), n, lambda)?;
        println!("{lambda:>8.0e} {exact:>10.3} {emp:>10.3}");
        pts.push((lambda, exact));
    }
    let fit = fit_loglog_slope(&pts)?;
    println!("log-log slope {:.4} (s=1 decay gives about -0.5)", fit.slope);
    Ok(())
}
