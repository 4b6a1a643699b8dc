//! Exact identities in the finite-rank operator lab.
//!
//! cargo run --release --example operator_identities

use dac_krr::operator_lab::{
    approximation_error, approximation_error_rkhs, f_lambda, second_order_residual, verify_difference_representation,
};
use dac_krr::experiments::verify::random_spd;
use dac_krr::{make_source_target, make_spectral, partition, sample_dataset, KernelSpec, NoiseModel, PartitionStrategy};

fn main() -> dac_krr::Result<()> {
    let kernel = KernelSpec::periodic_sobolev(1, 30)?;
    let spec = make_spectral(&kernel)?;
    let target = make_source_target(&spec, 1.0, 1.0, 0)?;
    let data = sample_dataset(&target, &spec, &NoiseModel::BoundedUniform { half_width: 0.4 }, 60, 3)?;

    for m in [2, 3, 5] {
        let part = partition(data.len(), m, PartitionStrategy::Contiguous)?;
        let gap = verify_difference_representation(&data, &part, 0.05, &kernel, &target, &spec)?;
        println!("m={m}: representation discrepancy {gap:.2e}");
    }

    let mut rng = dac_krr::rng::stream(0, &[1]);
    let a = random_spd(20, 0.1, &mut rng);
    let b = random_spd(20, 0.1, &mut rng);
    println!("second-order residual {:.2e}", second_order_residual(a.as_ref(), b.as_ref())?);

    println!("{:>8} {:>12} {:>12} {:>10}", "lambda", "‖f_λ-f_ρ‖_ρ", "λ^r‖g‖", "‖f_λ-f_ρ‖_K");
    for lambda in [1e-1, 1e-2, 1e-3] {
        let rho = approximation_error(&spec, &target, lambda)?;
        let k = approximation_error_rkhs(&spec, &target, lambda)?;
        println!("{lambda:>8.0e} {rho:>12.4e} {:>12.4e} {k:>10.4e}", lambda * target.g_norm);
    }
    let fl = f_lambda(&spec, &target, 1e-3)?;
    println!("f_λ constant coefficient {:.6} vs f_ρ {:.6}", fl[0], target.coefficients[0]);
    Ok(())
}
