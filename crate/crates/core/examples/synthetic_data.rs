//! Eigensystem of the periodic Sobolev kernel, a source-condition target and a sample.
//!
//! cargo run --release --example synthetic_data -- [out.csv]

use dac_krr::synthetic::f_rho_eval;
use dac_krr::{make_source_target, make_spectral, sample_dataset, KernelSpec, NoiseModel};

fn main() -> dac_krr::Result<()> {
    let spec = make_spectral(&KernelSpec::periodic_sobolev(2, 100)?)?;
    let head: Vec<String> = spec.eigenvalues()[..7].iter().map(|m| format!("{m:.4}")).collect();
    println!("dim {} trace {:.6} first eigenvalues [{}]", spec.dim(), spec.trace(), head.join(", "));

    for r in [0.25, 0.5, 1.0] {
        let t = make_source_target(&spec, r, 1.0, 0)?;
        println!("r={r}: ‖f_ρ‖_ρ = {:.4}, ‖g_ρ‖_ρ = {:.4}, f_ρ(0.1) = {:.4}", t.l2_norm(), t.g_norm, f_rho_eval(&t, &spec, 0.1));
    }

    let target = make_source_target(&spec, 0.5, 1.0, 0)?;
    let noise = NoiseModel::Heteroscedastic { base_std: 0.2, amplitude: 0.5 };
    let data = sample_dataset(&target, &spec, &noise, 8, 42)?;
    for (x, y) in data.x.iter().zip(&data.y) {
        println!("x={x:.4} y={y:+.4} f_ρ={:+.4}", f_rho_eval(&target, &spec, *x));
    }
    if let Some(path) = std::env::args().nth(1) {
        data.write_csv(&path)?;
        println!("wrote {path}");
    }
    Ok(())
}
