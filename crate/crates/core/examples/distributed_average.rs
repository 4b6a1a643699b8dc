//! Split the sample into m blocks, fit each block and average.
//!
//! cargo run --release --example distributed_average

use dac_krr::{compare_estimators, fit_distributed, partition, PartitionStrategy};
use dac_krr::{make_source_target, make_spectral, sample_dataset, KernelSpec, NoiseModel};

fn main() -> dac_krr::Result<()> {
    let kernel = KernelSpec::periodic_sobolev(1, 300)?;
    let spec = make_spectral(&kernel)?;
    let target = make_source_target(&spec, 0.5, 1.0, 0)?;
    let data = sample_dataset(&target, &spec, &NoiseModel::Gaussian { std: 0.3 }, 1000, 5)?;

    let part = partition(data.len(), 4, PartitionStrategy::Shuffled { seed: 3 })?;
    let avg = fit_distributed(&data, &part, 1e-2, &kernel)?;
    println!("block sizes {:?}, weights {:?}", avg.block_sizes, avg.weights);
    println!("f̄(0.3) = {:.5}, by blocks {:.5}", avg.predict(0.3), avg.predict_by_blocks(0.3));

    println!("{:>4} {:>10} {:>12} {:>12}", "m", "lambda", "‖f̄-f‖_ρ", "‖f̄-f‖_K");
    for m in [1, 2, 5, 10, 20] {
        let lambda = (m as f64 / data.len() as f64).powf(2.0 / 3.0);
        let part = partition(data.len(), m, PartitionStrategy::Contiguous)?;
        let gap = compare_estimators(&data, &part, lambda, &kernel, 2000, 11)?;
        println!("{m:>4} {lambda:>10.4} {:>12.3e} {:>12.3e}", gap.rho_dist, gap.k_dist);
    }
    Ok(())
}
