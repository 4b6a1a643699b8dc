//! Divide-and-conquer estimator.
//!
//! The sample is split into `m` disjoint blocks `D_j`. Each block is solved
//! independently with its own `(G_j + |D_j|·λ·I) α⁽ʲ⁾ = y_j`, and the local
//! estimators are averaged with weights `|D_j| / |D|`:
//!
//! ```text
//! f̄_{D,λ} = Σ_j (|D_j| / |D|) f_{D_j,λ}
//! ```
//!
//! The average lives in the span of `{K(x_i, ·)}` over the full sample, so it
//! is stored as a [`KrrModel`] whose coefficient at a sample in block `j` is
//! `w_j · α⁽ʲ⁾_i`.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::krr::{self, check_lambda, KrrModel};
use crate::rng::{self, purpose};
use crate::synthetic::Dataset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionStrategy {
    /// Consecutive index ranges.
    Contiguous,
    /// Seeded permutation, then consecutive ranges.
    Shuffled { seed: u64 },
}

/// Disjoint blocks covering `0..N`, with weights `|D_j| / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub blocks: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl Partition {
    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Build from explicit blocks; they must be non-empty and cover `0..N` exactly once.
    pub fn from_blocks(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        if blocks.is_empty() || blocks.iter().any(Vec::is_empty) {
            return Err(Error::arg("partition blocks must be non-empty"));
        }
        let mut seen = vec![false; n];
        for &i in blocks.iter().flatten() {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(Error::arg(format!("index {i} is out of range or repeated")));
            }
        }
        let weights = blocks.iter().map(|b| b.len() as f64 / n as f64).collect();
        Ok(Partition { blocks, weights })
    }
}

/// Split `0..n` into `m` blocks whose sizes differ by at most one.
///
/// The first `n mod m` blocks get the extra sample.
pub fn partition(n: usize, m: usize, strategy: PartitionStrategy) -> Result<Partition> {
    if m < 1 || m > n {
        return Err(Error::arg(format!("need 1 <= m <= N, got m={m}, N={n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let PartitionStrategy::Shuffled { seed } = strategy {
        order.shuffle(&mut rng::stream(seed, &[purpose::PARTITION, n as u64]));
    }
    let (base, extra) = (n / m, n % m);
    let mut blocks = Vec::with_capacity(m);
    let mut start = 0;
    for j in 0..m {
        let size = base + usize::from(j < extra);
        blocks.push(order[start..start + size].to_vec());
        start += size;
    }
    let weights = blocks.iter().map(|b| b.len() as f64 / n as f64).collect();
    Ok(Partition { blocks, weights })
}

/// The averaged estimator `f̄_{D,λ}` with its local solutions.
#[derive(Debug, Clone)]
pub struct AveragedModel {
    /// Global representation over the full sample, coefficients `w_j · α⁽ʲ⁾`.
    pub model: KrrModel,
    pub locals: Vec<KrrModel>,
    pub block_sizes: Vec<usize>,
    pub weights: Vec<f64>,
    pub lambda: f64,
}

impl AveragedModel {
    pub fn predict(&self, x: f64) -> f64 {
        self.model.predict(x)
    }

    /// `Σ_j w_j · f_{D_j,λ}(x)`, combined in block order.
    pub fn predict_by_blocks(&self, x: f64) -> f64 {
        self.locals
            .iter()
            .zip(&self.weights)
            .map(|(local, w)| w * local.predict(x))
            .sum()
    }
}

/// Fit every block independently and average.
///
/// Blocks are solved in parallel; the combination runs sequentially in block
/// order so the result does not depend on scheduling.
pub fn fit_distributed(data: &Dataset, part: &Partition, lambda: f64, kernel: &KernelSpec) -> Result<AveragedModel> {
    check_lambda(lambda)?;
    kernel.validate()?;
    if part.len() != data.len() {
        return Err(Error::arg(format!(
            "partition covers {} samples but the dataset has {}",
            part.len(),
            data.len()
        )));
    }
    let locals: Vec<KrrModel> = part
        .blocks
        .par_iter()
        .enumerate()
        .map(|(j, block)| krr::fit(&data.subset(block), lambda, kernel).map_err(|e| e.in_block(j)))
        .collect::<Result<_>>()?;

    let mut coefficients = vec![0.0; data.len()];
    for ((block, local), w) in part.blocks.iter().zip(&locals).zip(&part.weights) {
        for (&i, a) in block.iter().zip(&local.coefficients) {
            coefficients[i] = w * a;
        }
    }
    Ok(AveragedModel {
        model: KrrModel {
            support: data.x.clone(),
            coefficients,
            lambda,
            kernel: *kernel,
        },
        locals,
        block_sizes: part.sizes(),
        weights: part.weights.clone(),
        lambda,
    })
}

/// `‖f̄_{D,λ} − f_{D,λ}‖` in both metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorGap {
    /// Monte-Carlo `L²(ρ_X)` distance.
    pub rho_dist: f64,
    /// Exact RKHS distance.
    pub k_dist: f64,
}

/// Fit both estimators on `data` and measure how far apart they are.
pub fn compare_estimators(
    data: &Dataset,
    part: &Partition,
    lambda: f64,
    kernel: &KernelSpec,
    n_test: usize,
    seed: u64,
) -> Result<EstimatorGap> {
    if n_test == 0 {
        return Err(Error::arg("n_test must be at least 1"));
    }
    let batch = krr::fit(data, lambda, kernel)?;
    let averaged = fit_distributed(data, part, lambda, kernel)?;
    let k_dist = krr::rkhs_dist_sq(&averaged.model, &batch)?.sqrt();
    let points = krr::test_points(n_test, seed);
    let diff: Vec<f64> = averaged
        .model
        .predict_many(&points)
        .into_iter()
        .zip(batch.predict_many(&points))
        .map(|(a, b)| a - b)
        .collect();
    let rho_dist = krr::l2_from_differences(&diff).estimate;
    Ok(EstimatorGap { rho_dist, k_dist })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{make_source_target, make_spectral, sample_dataset, NoiseModel};

    fn data(n: usize, seed: u64) -> (Dataset, KernelSpec) {
        let k = KernelSpec::periodic_sobolev(1, 30).unwrap();
        let sp = make_spectral(&k).unwrap();
        let t = make_source_target(&sp, 0.5, 1.0, 0).unwrap();
        let d = sample_dataset(&t, &sp, &NoiseModel::BoundedUniform { half_width: 0.5 }, n, seed).unwrap();
        (d, k)
    }

    #[test]
    fn equal_split_with_remainder() {
        let p = partition(10, 3, PartitionStrategy::Contiguous).unwrap();
        assert_eq!(p.sizes(), vec![4, 3, 3]);
        assert_eq!(p.weights, vec![0.4, 0.3, 0.3]);
        assert_eq!(p.blocks[0], vec![0, 1, 2, 3]);

        let p = partition(8, 8, PartitionStrategy::Contiguous).unwrap();
        assert!(p.blocks.iter().enumerate().all(|(j, b)| b == &vec![j]));

        let p = partition(7, 1, PartitionStrategy::Shuffled { seed: 3 }).unwrap();
        assert_eq!(p.weights, vec![1.0]);
        let mut all = p.blocks[0].clone();
        all.sort();
        assert_eq!(all, (0..7).collect::<Vec<_>>());
    }

    #[test]
    fn invalid_block_counts() {
        assert!(partition(5, 0, PartitionStrategy::Contiguous).is_err());
        assert!(partition(5, 6, PartitionStrategy::Contiguous).is_err());
        assert!(Partition::from_blocks(vec![vec![0, 1], vec![1]]).is_err());
        assert!(Partition::from_blocks(vec![vec![0, 1], vec![]]).is_err());
    }

    #[test]
    fn shuffled_partition_is_seeded() {
        let a = partition(50, 4, PartitionStrategy::Shuffled { seed: 1 }).unwrap();
        let b = partition(50, 4, PartitionStrategy::Shuffled { seed: 1 }).unwrap();
        let c = partition(50, 4, PartitionStrategy::Shuffled { seed: 2 }).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.sizes(), vec![13, 13, 12, 12]);
    }

    #[test]
    fn two_distant_points() {
        let k = KernelSpec::gaussian(1e-3).unwrap();
        let d = Dataset::new(vec![0.0, 10.0], vec![1.0, 1.0]).unwrap();
        let p = partition(2, 2, PartitionStrategy::Contiguous).unwrap();
        let avg = fit_distributed(&d, &p, 1.0, &k).unwrap();
        let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-15);
        assert!(close(&avg.locals[0].coefficients, &[0.5]));
        assert!(close(&avg.locals[1].coefficients, &[0.5]));
        assert!(close(&avg.model.coefficients, &[0.25, 0.25]));
    }

    #[test]
    fn single_block_matches_batch() {
        let (d, k) = data(40, 1);
        let p = partition(40, 1, PartitionStrategy::Contiguous).unwrap();
        let avg = fit_distributed(&d, &p, 0.01, &k).unwrap();
        let batch = krr::fit(&d, 0.01, &k).unwrap();
        for (a, b) in avg.model.coefficients.iter().zip(&batch.coefficients) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
        let gap = compare_estimators(&d, &p, 0.01, &k, 200, 2).unwrap();
        assert!(gap.rho_dist <= 1e-10 && gap.k_dist <= 1e-10);
    }

    #[test]
    fn averaging_is_linear() {
        let (d, k) = data(60, 2);
        let p = partition(60, 3, PartitionStrategy::Contiguous).unwrap();
        let avg = fit_distributed(&d, &p, 0.05, &k).unwrap();
        for t in 0..20 {
            let x = (t as f64 * 0.618_033_988_7).fract();
            // independent composition from fit + predict
            let expect: f64 = p
                .blocks
                .iter()
                .map(|b| krr::fit(&d.subset(b), 0.05, &k).unwrap().predict(x) / 3.0)
                .sum();
            assert!((avg.predict(x) - expect).abs() <= 1e-12);
            assert!((avg.predict_by_blocks(x) - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn unequal_weights_scale_local_coefficients() {
        let (d, k) = data(10, 3);
        let p = partition(10, 3, PartitionStrategy::Contiguous).unwrap();
        let avg = fit_distributed(&d, &p, 0.1, &k).unwrap();
        for (pos, &i) in p.blocks[0].iter().enumerate() {
            assert_eq!(avg.model.coefficients[i], 0.4 * avg.locals[0].coefficients[pos]);
        }
    }

    #[test]
    fn within_block_order_does_not_matter() {
        let (d, k) = data(30, 4);
        let p = partition(30, 3, PartitionStrategy::Contiguous).unwrap();
        let mut reversed = p.blocks.clone();
        reversed.iter_mut().for_each(|b| b.reverse());
        let q = Partition::from_blocks(reversed).unwrap();
        let a = fit_distributed(&d, &p, 0.03, &k).unwrap();
        let b = fit_distributed(&d, &q, 0.03, &k).unwrap();
        for t in 0..10 {
            let x = t as f64 / 10.0 + 0.01;
            assert!((a.predict(x) - b.predict(x)).abs() <= 1e-10);
        }
    }

    #[test]
    fn huge_lambda_closes_gap() {
        let (d, k) = data(40, 5);
        let p = partition(40, 4, PartitionStrategy::Contiguous).unwrap();
        let gap = compare_estimators(&d, &p, 1e8, &k, 100, 1).unwrap();
        let ymax = d.y.iter().fold(0.0f64, |a, y| a.max(y.abs()));
        assert!(gap.rho_dist <= ymax * 1e-7);
        assert!(gap.k_dist <= ymax * 1e-7);
    }

    #[test]
    fn block_failure_is_identified() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let d = Dataset::new(vec![0.0, 1.0, f64::NAN, 2.0], vec![1.0; 4]).unwrap();
        let p = partition(4, 2, PartitionStrategy::Contiguous).unwrap();
        match fit_distributed(&d, &p, 0.1, &k) {
            Err(Error::Domain(_)) => {}
            other => panic!("expected domain error, got {other:?}"),
        }
        let bad = Dataset::new(vec![0.0, 1.0, 2.0, 3.0], vec![1.0; 4]).unwrap();
        let err = crate::linalg::solve_shifted_spd(faer::Mat::from_fn(1, 1, |_, _| -1.0), 0.0, &[1.0])
            .unwrap_err()
            .in_block(1);
        assert!(matches!(err, Error::NotPositiveDefinite { pivot: 0, block: Some(1) }));
        assert!(fit_distributed(&bad, &p, 0.1, &k).is_ok());
    }
}
