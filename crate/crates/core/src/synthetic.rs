//! Finite-rank spectral ground truth and seeded data generation.
//!
//! Inputs are uniform on `[0, 1)`. Under that distribution the periodic
//! Sobolev kernel has the trigonometric eigenbasis `e_ℓ` (see
//! [`crate::kernels::trig_basis`]) with eigenvalues `1, 1⁻²ˢ, 1⁻²ˢ, 2⁻²ˢ, ...`,
//! so the integral operator, the regression function and every population
//! quantity derived from them can be written down exactly.

use std::io::Write;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{sobolev_eigenvalue, trig_basis, KernelSpec};
use crate::rng::{self, purpose, StreamRng};

/// One eigenfunction of the uniform-measure integral operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisFunction {
    Constant,
    /// `√2 cos(2πk·)`
    Cos(usize),
    /// `√2 sin(2πk·)`
    Sin(usize),
}

impl BasisFunction {
    pub fn frequency(self) -> usize {
        match self {
            BasisFunction::Constant => 0,
            BasisFunction::Cos(k) | BasisFunction::Sin(k) => k,
        }
    }
}

/// Truncated Mercer eigensystem `{μ_ℓ, e_ℓ}` of a periodic Sobolev kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralModel {
    s: u32,
    k_max: usize,
    eigenvalues: Vec<f64>,
}

impl SpectralModel {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn kernel(&self) -> KernelSpec {
        KernelSpec::PeriodicSobolev {
            s: self.s,
            k_max: self.k_max,
        }
    }

    pub fn basis(&self) -> impl Iterator<Item = BasisFunction> + '_ {
        std::iter::once(BasisFunction::Constant)
            .chain((1..=self.k_max).flat_map(|k| [BasisFunction::Cos(k), BasisFunction::Sin(k)]))
    }

    /// `Tr(L_K) = Σ μ_ℓ`.
    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().rev().sum()
    }

    /// All basis functions at `x`, written into `out` (length [`Self::dim`]).
    pub fn basis_at(&self, x: f64, out: &mut [f64]) {
        trig_basis(x, self.k_max, out);
    }

    /// `Σ_ℓ coeffs_ℓ e_ℓ(x)` for a coefficient vector in the `e_ℓ` basis.
    pub fn series_eval(&self, coeffs: &[f64], x: f64) -> f64 {
        assert_eq!(coeffs.len(), self.dim(), "coefficient vector has wrong length");
        let mut e = vec![0.0; self.dim()];
        self.basis_at(x, &mut e);
        e.iter().zip(coeffs).map(|(a, b)| a * b).sum()
    }

    /// Evaluate a series at many points, reusing one basis buffer.
    pub fn series_eval_many(&self, coeffs: &[f64], xs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.dim(), "coefficient vector has wrong length");
        let mut e = vec![0.0; self.dim()];
        xs.iter()
            .map(|&x| {
                self.basis_at(x, &mut e);
                e.iter().zip(coeffs).map(|(a, b)| a * b).sum()
            })
            .collect()
    }
}

/// Eigensystem of a periodic Sobolev kernel under uniform inputs.
pub fn make_spectral(kernel: &KernelSpec) -> Result<SpectralModel> {
    kernel.validate()?;
    match *kernel {
        KernelSpec::PeriodicSobolev { s, k_max } => {
            let eigenvalues = std::iter::once(1.0)
                .chain((1..=k_max).flat_map(|k| {
                    let mu = sobolev_eigenvalue(s, k);
                    [mu, mu]
                }))
                .collect();
            Ok(SpectralModel { s, k_max, eigenvalues })
        }
        KernelSpec::Gaussian { .. } => Err(Error::UnsupportedKernel(
            "gaussian kernel has no closed-form eigensystem under uniform inputs".into(),
        )),
    }
}

/// Regression function `f_ρ = L_K^r g_ρ`, stored by its coordinates in the `e_ℓ` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFunction {
    pub coefficients: Vec<f64>,
    pub r: f64,
    /// `‖g_ρ‖_ρ`
    pub g_norm: f64,
}

impl TargetFunction {
    /// `c_ℓ = μ_ℓ^r g_ℓ` for explicit `g`.
    pub fn from_source(eigenvalues: &[f64], r: f64, g: &[f64]) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::arg(format!("source exponent r must lie in (0, 1], got {r}")));
        }
        if eigenvalues.len() != g.len() {
            return Err(Error::arg("source vector and eigenvalues differ in length"));
        }
        if eigenvalues.iter().any(|&mu| !(mu > 0.0)) {
            return Err(Error::arg("eigenvalues must be positive"));
        }
        let coefficients = eigenvalues.iter().zip(g).map(|(mu, g)| mu.powf(r) * g).collect();
        let g_norm = g.iter().rev().map(|g| g * g).sum::<f64>().sqrt();
        Ok(TargetFunction { coefficients, r, g_norm })
    }

    /// `g_ℓ = c_ℓ / μ_ℓ^r`, recovered from the stored coefficients.
    pub fn source(&self, eigenvalues: &[f64]) -> Vec<f64> {
        self.coefficients
            .iter()
            .zip(eigenvalues)
            .map(|(c, mu)| c / mu.powf(self.r))
            .collect()
    }

    /// `Σ |c_ℓ| √2 ≥ ‖f_ρ‖_∞`.
    pub fn sup_bound(&self) -> f64 {
        std::f64::consts::SQRT_2 * self.coefficients.iter().map(|c| c.abs()).sum::<f64>()
    }

    /// `‖f_ρ‖_ρ`
    pub fn l2_norm(&self) -> f64 {
        self.coefficients.iter().rev().map(|c| c * c).sum::<f64>().sqrt()
    }
}

/// Target satisfying the source condition with exponent `r`.
///
/// The source function has `|g_ℓ| = k^(-decay)` on both modes of frequency
/// `k ≥ 1` and `|g_0| = 1`. Signs alternate with the basis index, and the
/// seed's parity decides the sign of the constant mode.
pub fn make_source_target(spec: &SpectralModel, r: f64, decay: f64, seed: u64) -> Result<TargetFunction> {
    if !(decay > 0.5) || !decay.is_finite() {
        return Err(Error::arg(format!("source decay must exceed 1/2, got {decay}")));
    }
    let g: Vec<f64> = spec
        .basis()
        .enumerate()
        .map(|(l, b)| {
            let magnitude = match b.frequency() {
                0 => 1.0,
                k => (k as f64).powf(-decay),
            };
            if (l as u64).wrapping_add(seed) % 2 == 0 {
                magnitude
            } else {
                -magnitude
            }
        })
        .collect();
    TargetFunction::from_source(spec.eigenvalues(), r, &g)
}

/// `f_ρ(x) = Σ c_ℓ e_ℓ(x)`.
pub fn f_rho_eval(target: &TargetFunction, spec: &SpectralModel, x: f64) -> f64 {
    spec.series_eval(&target.coefficients, x)
}

/// Conditional distribution of `y − f_ρ(x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseModel {
    /// Uniform on `[-half_width, half_width]`; `half_width = 0` is noiseless.
    BoundedUniform { half_width: f64 },
    Gaussian { std: f64 },
    /// Gaussian with `σ(x) = base_std · (1 + amplitude · sin(2πx))`, `0 ≤ amplitude < 1`.
    Heteroscedastic { base_std: f64, amplitude: f64 },
}

impl NoiseModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            NoiseModel::BoundedUniform { half_width } => half_width >= 0.0 && half_width.is_finite(),
            NoiseModel::Gaussian { std } => std >= 0.0 && std.is_finite(),
            NoiseModel::Heteroscedastic { base_std, amplitude } => {
                base_std >= 0.0 && base_std.is_finite() && (0.0..1.0).contains(&amplitude)
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::arg(format!("invalid noise model {self:?}")))
        }
    }

    /// Conditional standard deviation `σ_ρ(x)`.
    pub fn std_at(&self, x: f64) -> f64 {
        match *self {
            NoiseModel::BoundedUniform { half_width } => half_width / 3f64.sqrt(),
            NoiseModel::Gaussian { std } => std,
            NoiseModel::Heteroscedastic { base_std, amplitude } => {
                base_std * (1.0 + amplitude * (std::f64::consts::TAU * x).sin())
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, x: f64, rng: &mut R) -> f64 {
        match *self {
            NoiseModel::BoundedUniform { half_width } => {
                if half_width == 0.0 {
                    0.0
                } else {
                    rng.random_range(-half_width..=half_width)
                }
            }
            NoiseModel::Gaussian { .. } | NoiseModel::Heteroscedastic { .. } => {
                let std = self.std_at(x);
                if std == 0.0 {
                    0.0
                } else {
                    Normal::new(0.0, std).expect("validated std").sample(rng)
                }
            }
        }
    }
}

/// Sample `D = {(x_i, y_i)}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::arg("dataset must contain at least one sample"));
        }
        if x.len() != y.len() {
            return Err(Error::arg(format!("{} inputs but {} outputs", x.len(), y.len())));
        }
        Ok(Dataset { x, y, seed: None })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            x: indices.iter().map(|&i| self.x[i]).collect(),
            y: indices.iter().map(|&i| self.y[i]).collect(),
            seed: self.seed,
        }
    }

    /// CSV with header `x,y` and 17 significant digits.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "x,y")?;
        for (x, y) in self.x.iter().zip(&self.y) {
            writeln!(out, "{x:.16e},{y:.16e}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut reader = csv::Reader::from_path(path)?;
        let headers = reader.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h.trim() == name)
                .ok_or_else(|| Error::Config(format!("dataset CSV lacks a `{name}` column")))
        };
        let (ix, iy) = (col("x")?, col("y")?);
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for record in reader.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                let field = record.get(i).unwrap_or("").trim();
                field
                    .parse()
                    .map_err(|_| Error::Config(format!("bad float `{field}` in dataset CSV")))
            };
            x.push(parse(ix)?);
            y.push(parse(iy)?);
        }
        Dataset::new(x, y)
    }
}

/// Draw `n` samples with `x ~ U[0, 1)` and `y = f_ρ(x) + ε`.
pub fn sample_dataset(
    target: &TargetFunction,
    spec: &SpectralModel,
    noise: &NoiseModel,
    n: usize,
    seed: u64,
) -> Result<Dataset> {
    let mut rng = rng::stream(seed, &[purpose::DATA, n as u64]);
    let mut data = sample_dataset_with(target, spec, noise, n, &mut rng)?;
    data.seed = Some(seed);
    Ok(data)
}

/// [`sample_dataset`] on a caller-supplied stream.
pub fn sample_dataset_with(
    target: &TargetFunction,
    spec: &SpectralModel,
    noise: &NoiseModel,
    n: usize,
    rng: &mut StreamRng,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::arg("cannot sample an empty dataset"));
    }
    if target.coefficients.len() != spec.dim() {
        return Err(Error::arg("target and spectral model have different dimensions"));
    }
    noise.validate()?;
    let x: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let clean = spec.series_eval_many(&target.coefficients, &x);
    let y = x
        .iter()
        .zip(clean)
        .map(|(&xi, f)| f + noise.sample(xi, rng))
        .collect();
    Ok(Dataset { x, y, seed: None })
}
