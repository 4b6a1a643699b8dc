//! Fit the single-machine estimator on synthetic data and compare it with the truth.
//!
//! cargo run --release --example solve_krr

use dac_krr::krr::{l2_dist_mc, rkhs_norm_sq};
use dac_krr::synthetic::f_rho_eval;
use dac_krr::{fit, make_source_target, make_spectral, sample_dataset, KernelSpec, NoiseModel};

fn main() -> dac_krr::Result<()> {
    let kernel = KernelSpec::periodic_sobolev(1, 500)?;
    let spec = make_spectral(&kernel)?;
    let target = make_source_target(&spec, 0.5, 1.0, 0)?;
    let noise = NoiseModel::BoundedUniform { half_width: 0.5 };

    println!("{:>6} {:>10} {:>12} {:>10}", "N", "lambda", "‖f-f_ρ‖_ρ", "‖f‖_K");
    for n in [100, 400, 1600] {
        let data = sample_dataset(&target, &spec, &noise, n, 1)?;
        let lambda = (n as f64).powf(-2.0 / 3.0);
        let model = fit(&data, lambda, &kernel)?;
        let err = l2_dist_mc(|x| model.predict(x), |x| f_rho_eval(&target, &spec, x), 2000, 99)?;
        println!("{n:>6} {lambda:>10.2e} {err:>12.5} {:>10.4}", rkhs_norm_sq(&model)?.sqrt());
    }

    // the estimator works with any kernel; the Gaussian one has no finite eigensystem
    let gauss = KernelSpec::gaussian(0.1)?;
    let data = sample_dataset(&target, &spec, &noise, 200, 2)?;
    let model = fit(&data, 1e-3, &gauss)?;
    println!("gaussian fit at x=0.25: {:.4} (truth {:.4})", model.predict(0.25), f_rho_eval(&target, &spec, 0.25));
    Ok(())
}
