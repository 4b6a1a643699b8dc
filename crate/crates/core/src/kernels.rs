//! Mercer kernels on the line and the unit circle.
//!
//! Two kernels are provided:
//!
//! * [`KernelSpec::Gaussian`], `K(x, y) = exp(-(x - y)² / (2σ²))` on any reals.
//! * [`KernelSpec::PeriodicSobolev`], the finite Mercer sum
//!   `K(x, y) = 1 + 2 Σ_{k=1}^{k_max} k^(-2s) cos(2πk(x - y))` on `[0, 1)`.
//!
//! The periodic kernel is deliberately finite-rank: its Gram matrices are
//! assembled as `V Vᵀ` from the explicit feature map `v_ℓ(x) = √μ_ℓ e_ℓ(x)`,
//! and every operator built from it in [`crate::operator_lab`] is exact.

use std::f64::consts::{SQRT_2, TAU};

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

/// Truncation used when a periodic Sobolev kernel is built without an explicit `k_max`.
pub const DEFAULT_K_MAX: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    Gaussian {
        bandwidth: f64,
    },
    PeriodicSobolev {
        s: u32,
        #[serde(default = "default_k_max")]
        k_max: usize,
    },
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

impl KernelSpec {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        let k = KernelSpec::Gaussian { bandwidth };
        k.validate()?;
        Ok(k)
    }

    pub fn periodic_sobolev(s: u32, k_max: usize) -> Result<Self> {
        let k = KernelSpec::PeriodicSobolev { s, k_max };
        k.validate()?;
        Ok(k)
    }

    /// Check parameter invariants. Deserialized specs should go through this.
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { bandwidth } => {
                if !(bandwidth > 0.0 && bandwidth.is_finite()) {
                    return Err(Error::arg(format!("gaussian bandwidth must be > 0, got {bandwidth}")));
                }
            }
            KernelSpec::PeriodicSobolev { s, k_max } => {
                if s < 1 {
                    return Err(Error::arg("periodic sobolev order s must be >= 1"));
                }
                if k_max < 1 {
                    return Err(Error::arg("periodic sobolev k_max must be >= 1"));
                }
            }
        }
        Ok(())
    }

    pub fn check_point(&self, x: f64) -> Result<()> {
        if !x.is_finite() {
            return Err(Error::Domain(format!("non-finite point {x}")));
        }
        if let KernelSpec::PeriodicSobolev { .. } = self {
            if !(0.0..1.0).contains(&x) {
                return Err(Error::Domain(format!("point {x} outside [0, 1)")));
            }
        }
        Ok(())
    }

    /// Kernel value `K(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        self.check_point(x)?;
        self.check_point(y)?;
        Ok(self.eval_unchecked(x, y))
    }

    /// Kernel value without domain checks. Symmetric bit-for-bit: only `|x - y|` is used.
    pub(crate) fn eval_unchecked(&self, x: f64, y: f64) -> f64 {
        let t = (x - y).abs();
        match *self {
            KernelSpec::Gaussian { bandwidth } => (-(t * t) / (2.0 * bandwidth * bandwidth)).exp(),
            KernelSpec::PeriodicSobolev { s, k_max } => {
                // smallest terms first
                let mut acc = 0.0;
                for k in (1..=k_max).rev() {
                    let phase = (k as f64 * t).fract();
                    acc += sobolev_eigenvalue(s, k) * (TAU * phase).cos();
                }
                1.0 + 2.0 * acc
            }
        }
    }

    /// `κ = sup_x √K(x, x)`; exact for both kernels since both are stationary.
    pub fn kappa(&self) -> f64 {
        match *self {
            KernelSpec::Gaussian { .. } => 1.0,
            KernelSpec::PeriodicSobolev { .. } => self.eval_unchecked(0.0, 0.0).sqrt(),
        }
    }

    /// Rank of the kernel's Mercer expansion, if finite.
    pub fn rank(&self) -> Option<usize> {
        match *self {
            KernelSpec::Gaussian { .. } => None,
            KernelSpec::PeriodicSobolev { k_max, .. } => Some(2 * k_max + 1),
        }
    }

    /// Gram matrix `G[i][j] = K(X[i], X[j])`, exactly symmetric.
    pub fn gram(&self, points: &[f64]) -> Result<Mat<f64>> {
        if points.is_empty() {
            return Err(Error::arg("gram matrix of an empty point set"));
        }
        for &x in points {
            self.check_point(x)?;
        }
        Ok(match *self {
            KernelSpec::PeriodicSobolev { .. } => {
                let v = self.feature_matrix_unchecked(points);
                linalg::outer_gram(v.as_ref())
            }
            KernelSpec::Gaussian { .. } => {
                let n = points.len();
                let mut g = Mat::<f64>::zeros(n, n);
                for j in 0..n {
                    for i in j..n {
                        g[(i, j)] = self.eval_unchecked(points[i], points[j]);
                    }
                }
                linalg::mirror_lower(&mut g);
                g
            }
        })
    }

    /// Feature matrix with rows `v(x_i)`, so that `K(x, y) = v(x)·v(y)`.
    ///
    /// Only finite-rank kernels have one.
    pub fn feature_matrix(&self, points: &[f64]) -> Result<Mat<f64>> {
        if self.rank().is_none() {
            return Err(Error::UnsupportedKernel(
                "gaussian kernel has no finite feature map".into(),
            ));
        }
        for &x in points {
            self.check_point(x)?;
        }
        Ok(self.feature_matrix_unchecked(points))
    }

    pub(crate) fn feature_matrix_unchecked(&self, points: &[f64]) -> Mat<f64> {
        let KernelSpec::PeriodicSobolev { s, k_max } = *self else {
            unreachable!("feature map requested for an infinite-rank kernel");
        };
        let scale: Vec<f64> = std::iter::once(1.0)
            .chain((1..=k_max).flat_map(|k| {
                let r = sobolev_eigenvalue(s, k).sqrt();
                [r, r]
            }))
            .collect();
        let d = scale.len();
        let mut v = Mat::<f64>::zeros(points.len(), d);
        let mut row = vec![0.0; d];
        for (i, &x) in points.iter().enumerate() {
            trig_basis(x, k_max, &mut row);
            for (l, (&b, &c)) in row.iter().zip(&scale).enumerate() {
                v[(i, l)] = b * c;
            }
        }
        v
    }
}

/// Mercer eigenvalue `k^(-2s)` of the periodic Sobolev kernel at frequency `k ≥ 1`.
pub fn sobolev_eigenvalue(s: u32, k: usize) -> f64 {
    (k as f64).powi(-2 * s as i32)
}

/// The `L²[0,1)`-orthonormal trigonometric basis at `x`:
/// `[1, √2 cos(2πx), √2 sin(2πx), √2 cos(4πx), √2 sin(4πx), ...]`.
///
/// `out` must have length `2·k_max + 1`.
pub fn trig_basis(x: f64, k_max: usize, out: &mut [f64]) {
    assert_eq!(out.len(), 2 * k_max + 1, "trig basis buffer has wrong length");
    out[0] = 1.0;
    for k in 1..=k_max {
        let phase = (k as f64 * x).fract();
        let (sin, cos) = (TAU * phase).sin_cos();
        out[2 * k - 1] = SQRT_2 * cos;
        out[2 * k] = SQRT_2 * sin;
    }
}
