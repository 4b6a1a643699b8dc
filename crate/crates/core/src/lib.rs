//! Divide-and-conquer kernel ridge regression.
//!
//! The crate fits regularized least-squares estimators in a reproducing kernel
//! Hilbert space, averages local estimators fit on disjoint data blocks, and
//! ships a finite-rank "operator lab" in which the integral operator, the
//! effective dimension and the population regularized solution are exactly
//! computable. A config-driven experiment runner measures convergence rates
//! of both estimators and fits log-log slopes.
//!
//! Module map:
//!
//! * [`kernels`]: Gaussian and truncated periodic Sobolev kernels, Gram matrices.
//! * [`synthetic`]: eigensystems, source-condition targets, seeded data.
//! * [`krr`]: the single-machine estimator and its norms.
//! * [`distributed`]: partitions and the averaged estimator.
//! * [`operator_lab`]: operator identities, effective dimension, concentration.
//! * [`experiments`]: λ rules, rate experiments, CSV/SVG output.
//! * [`cli`]: the `dac-krr` command line.

pub mod cli;
pub mod distributed;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod krr;
pub mod linalg;
pub mod operator_lab;
pub mod rng;
pub mod synthetic;

pub use distributed::{compare_estimators, fit_distributed, partition, AveragedModel, Partition, PartitionStrategy};
pub use error::{Error, Result};
pub use kernels::KernelSpec;
pub use krr::{fit, KrrModel};
pub use synthetic::{make_source_target, make_spectral, sample_dataset, Dataset, NoiseModel, SpectralModel, TargetFunction};

pub use faer;
