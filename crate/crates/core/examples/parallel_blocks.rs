//! Block solves run in parallel but combine in a fixed order, so results are bitwise stable.
//!
//! cargo run --release --example parallel_blocks

use dac_krr::{fit_distributed, make_source_target, make_spectral, partition, sample_dataset};
use dac_krr::{KernelSpec, NoiseModel, PartitionStrategy};

fn main() -> dac_krr::Result<()> {
    let kernel = KernelSpec::periodic_sobolev(1, 200)?;
    let spec = make_spectral(&kernel)?;
    let target = make_source_target(&spec, 0.5, 1.0, 0)?;
    let data = sample_dataset(&target, &spec, &NoiseModel::Gaussian { std: 0.5 }, 2000, 9)?;
    let part = partition(data.len(), 16, PartitionStrategy::Shuffled { seed: 4 })?;

    let mut reference = None;
    for threads in [1, 2, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().expect("thread pool");
        let start = std::time::Instant::now();
        let avg = pool.install(|| fit_distributed(&data, &part, 1e-3, &kernel))?;
        let same = reference.get_or_insert_with(|| avg.model.coefficients.clone()) == &avg.model.coefficients;
        println!("{threads} threads: {:?}, identical to 1 thread: {same}", start.elapsed());
    }
    Ok(())
}
