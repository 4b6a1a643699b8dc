//! Single-machine regularized least squares in an RKHS.
//!
//! The estimator minimizes the mean-squared empirical loss plus `λ‖f‖²_K`:
//!
//! ```text
//! f_{D,λ} = argmin_f (1/N) Σ (f(x_i) − y_i)² + λ ‖f‖²_K
//! ```
//!
//! By the representer property `f = Σ α_i K(x_i, ·)`, and because the loss is
//! averaged rather than summed, the coefficients solve `(G + N·λ·I) α = y`.
//! Note the `N·λ` shift: many libraries use `(G + λI)` instead.

use std::io::{BufRead, Write};
use std::path::Path;

use faer::{Mat, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::linalg;
use crate::rng::{self, purpose};
use crate::synthetic::Dataset;

/// `f(x) = Σ_i α_i K(support_i, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KrrModel {
    pub support: Vec<f64>,
    pub coefficients: Vec<f64>,
    pub lambda: f64,
    pub kernel: KernelSpec,
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("regularization parameter must be > 0, got {lambda}")))
    }
}

/// Fit `f_{D,λ}`.
pub fn fit(data: &Dataset, lambda: f64, kernel: &KernelSpec) -> Result<KrrModel> {
    check_lambda(lambda)?;
    kernel.validate()?;
    let gram = kernel.gram(&data.x)?;
    fit_with_gram(data, gram, lambda, kernel)
}

/// Fit from a precomputed Gram matrix of `data.x`. The matrix is consumed.
pub fn fit_with_gram(data: &Dataset, gram: Mat<f64>, lambda: f64, kernel: &KernelSpec) -> Result<KrrModel> {
    check_lambda(lambda)?;
    let n = data.len();
    if gram.nrows() != n {
        return Err(Error::arg(format!("gram of size {} for {n} samples", gram.nrows())));
    }
    let coefficients = linalg::solve_shifted_spd(gram, n as f64 * lambda, &data.y)?;
    Ok(KrrModel {
        support: data.x.clone(),
        coefficients,
        lambda,
        kernel: *kernel,
    })
}

impl KrrModel {
    /// The zero function on `support`.
    pub fn zero(support: Vec<f64>, lambda: f64, kernel: KernelSpec) -> Self {
        let coefficients = vec![0.0; support.len()];
        KrrModel { support, coefficients, lambda, kernel }
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.support
            .iter()
            .zip(&self.coefficients)
            .map(|(&s, &a)| a * self.kernel.eval_unchecked(s, x))
            .sum()
    }

    /// Predictions at many points. Finite-rank kernels go through the feature map.
    pub fn predict_many(&self, xs: &[f64]) -> Vec<f64> {
        match self.phi_coordinates() {
            Ok(b) => {
                let v = self.kernel.feature_matrix_unchecked(xs);
                linalg::mat_vec(v.as_ref(), &b)
            }
            Err(_) => xs.iter().map(|&x| self.predict(x)).collect(),
        }
    }

    /// Coordinates `Σ α_i v(x_i)` of the function in the `H_K`-orthonormal basis
    /// `φ_ℓ = √μ_ℓ e_ℓ`. Finite-rank kernels only.
    pub fn phi_coordinates(&self) -> Result<Vec<f64>> {
        let v = self.kernel.feature_matrix(&self.support)?;
        Ok(linalg::transpose_mat_vec(v.as_ref(), &self.coefficients))
    }

    /// `‖(G + Nλ I) α − y‖`.
    pub fn normal_equation_residual(&self, gram: MatRef<'_, f64>, y: &[f64]) -> f64 {
        let shift = self.support.len() as f64 * self.lambda;
        let g_alpha = linalg::mat_vec(gram, &self.coefficients);
        g_alpha
            .iter()
            .zip(&self.coefficients)
            .zip(y)
            .map(|((ga, a), y)| (ga + shift * a - y).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// `(1/N) Σ (f(x_i) − y_i)² + λ αᵀGα` for arbitrary coefficients on the support.
    pub fn objective(gram: MatRef<'_, f64>, coefficients: &[f64], y: &[f64], lambda: f64) -> f64 {
        let g_alpha = linalg::mat_vec(gram, coefficients);
        let loss = g_alpha.iter().zip(y).map(|(f, y)| (f - y).powi(2)).sum::<f64>() / y.len() as f64;
        loss + lambda * linalg::dot(coefficients, &g_alpha)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let header = ModelHeader {
            kernel: self.kernel,
            lambda: self.lambda,
            n: self.support.len(),
        };
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "# {}", serde_json::to_string(&header)?)?;
        writeln!(out, "x,alpha")?;
        for (x, a) in self.support.iter().zip(&self.coefficients) {
            writeln!(out, "{x:.16e},{a:.16e}")?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut lines = file.lines();
        let first = lines.next().transpose()?.unwrap_or_default();
        let json = first
            .strip_prefix('#')
            .ok_or_else(|| Error::Config("model CSV must start with a `# {json}` header".into()))?;
        let header: ModelHeader = serde_json::from_str(json.trim())?;
        header.kernel.validate()?;
        let rest: String = lines.collect::<std::io::Result<Vec<_>>>()?.join("\n");
        let mut reader = csv::Reader::from_reader(rest.as_bytes());
        let (mut support, mut coefficients) = (Vec::new(), Vec::new());
        for record in reader.records() {
            let record = record?;
            let parse = |i: usize| -> Result<f64> {
                let f = record.get(i).unwrap_or("").trim();
                f.parse().map_err(|_| Error::Config(format!("bad float `{f}` in model CSV")))
            };
            support.push(parse(0)?);
            coefficients.push(parse(1)?);
        }
        if support.len() != header.n {
            return Err(Error::Config(format!(
                "model header says N={} but {} rows follow",
                header.n,
                support.len()
            )));
        }
        Ok(KrrModel {
            support,
            coefficients,
            lambda: header.lambda,
            kernel: header.kernel,
        })
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelHeader {
    kernel: KernelSpec,
    lambda: f64,
    n: usize,
}

/// `‖f‖²_K = αᵀ G α`.
pub fn rkhs_norm_sq(model: &KrrModel) -> Result<f64> {
    if model.support.is_empty() {
        return Ok(0.0);
    }
    let g = model.kernel.gram(&model.support)?;
    let ga = linalg::mat_vec(g.as_ref(), &model.coefficients);
    Ok(linalg::dot(&model.coefficients, &ga).max(0.0))
}

/// `‖f_a − f_b‖²_K = βᵀ G_∪ β` over the union of supports, with `β = (α_a, −α_b)`.
///
/// When both models share the same support the coefficients are subtracted
/// first and the quadratic form runs over that support alone.
pub fn rkhs_dist_sq(a: &KrrModel, b: &KrrModel) -> Result<f64> {
    if a.kernel != b.kernel {
        return Err(Error::arg("models use different kernels"));
    }
    let (support, beta) = if a.support == b.support {
        let beta = a.coefficients.iter().zip(&b.coefficients).map(|(x, y)| x - y).collect();
        (a.support.clone(), beta)
    } else {
        let support = a.support.iter().chain(&b.support).copied().collect();
        let beta = a.coefficients.iter().copied().chain(b.coefficients.iter().map(|c| -c)).collect();
        (support, beta)
    };
    rkhs_norm_sq(&KrrModel {
        support,
        coefficients: beta,
        lambda: a.lambda,
        kernel: a.kernel,
    })
}

/// Monte-Carlo estimate of an `L²(ρ_X)` norm with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloNorm {
    pub estimate: f64,
    /// Delta-method standard error of `estimate`.
    pub stderr: f64,
}

/// `n_test` points drawn from `ρ_X = U[0, 1)`.
pub fn test_points(n_test: usize, seed: u64) -> Vec<f64> {
    use rand::Rng;
    let mut rng = rng::stream(seed, &[purpose::TEST_POINTS, n_test as u64]);
    (0..n_test).map(|_| rng.random::<f64>()).collect()
}

/// `√((1/n) Σ d_i²)` for pointwise differences `d_i`.
pub fn l2_from_differences(diff: &[f64]) -> MonteCarloNorm {
    let n = diff.len() as f64;
    let sq: Vec<f64> = diff.iter().map(|d| d * d).collect();
    let mean = sq.iter().sum::<f64>() / n;
    let estimate = mean.sqrt();
    let stderr = if diff.len() < 2 || estimate == 0.0 {
        0.0
    } else {
        let var = sq.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt() / (2.0 * estimate)
    };
    MonteCarloNorm { estimate, stderr }
}

/// Monte-Carlo `‖f − g‖_ρ` with its standard error.
pub fn l2_dist_mc_with_stderr(
    f: impl Fn(f64) -> f64,
    g: impl Fn(f64) -> f64,
    n_test: usize,
    seed: u64,
) -> Result<MonteCarloNorm> {
    if n_test == 0 {
        return Err(Error::arg("n_test must be at least 1"));
    }
    let diff: Vec<f64> = test_points(n_test, seed).into_iter().map(|t| f(t) - g(t)).collect();
    Ok(l2_from_differences(&diff))
}

/// Monte-Carlo `‖f − g‖_ρ = √((1/n) Σ (f(t_i) − g(t_i))²)`, `t_i ~ U[0, 1)`.
pub fn l2_dist_mc(f: impl Fn(f64) -> f64, g: impl Fn(f64) -> f64, n_test: usize, seed: u64) -> Result<f64> {
    l2_dist_mc_with_stderr(f, g, n_test, seed).map(|m| m.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::{make_source_target, make_spectral, sample_dataset, NoiseModel};

    fn periodic_data(n: usize, seed: u64) -> (Dataset, KernelSpec) {
        let k = KernelSpec::periodic_sobolev(1, 30).unwrap();
        let sp = make_spectral(&k).unwrap();
        let t = make_source_target(&sp, 0.5, 1.0, 0).unwrap();
        let d = sample_dataset(&t, &sp, &NoiseModel::BoundedUniform { half_width: 0.5 }, n, seed).unwrap();
        (d, k)
    }

    #[test]
    fn scalar_fit() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let d = Dataset::new(vec![0.2], vec![1.0]).unwrap();
        let m = fit(&d, 1.0, &k).unwrap();
        // Cholesky goes through √2, so the result is 0.5 up to one ulp
        assert!((m.coefficients[0] - 0.5).abs() < 1e-15);
        assert!((m.predict(0.2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_lambda() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let d = Dataset::new(vec![0.2], vec![1.0]).unwrap();
        assert!(matches!(fit(&d, 0.0, &k), Err(Error::InvalidArgument(_))));
        assert!(matches!(fit(&d, -1.0, &k), Err(Error::InvalidArgument(_))));
        assert!(matches!(fit(&d, f64::NAN, &k), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn nan_targets_fail_numerically_or_propagate() {
        let k = KernelSpec::gaussian(1.0).unwrap();
        let d = Dataset::new(vec![0.2, 0.4], vec![f64::NAN, 1.0]).unwrap();
        let m = fit(&d, 0.1, &k).unwrap();
        assert!(m.coefficients.iter().any(|c| c.is_nan()));
    }

    #[test]
    fn huge_lambda_shrinks_to_zero() {
        let (d, k) = periodic_data(25, 1);
        let lambda = 1e6;
        let m = fit(&d, lambda, &k).unwrap();
        let ynorm = linalg::norm(&d.y);
        assert!(linalg::norm(&m.coefficients) <= ynorm / (25.0 * lambda) * (1.0 + 1e-12));
        assert!(m.predict(0.5).abs() < 1e-5);
    }

    #[test]
    fn residual_and_local_optimality() {
        let (d, k) = periodic_data(40, 2);
        let lambda = 0.01;
        let m = fit(&d, lambda, &k).unwrap();
        let g = k.gram(&d.x).unwrap();
        assert!(m.normal_equation_residual(g.as_ref(), &d.y) <= 1e-8 * linalg::norm(&d.y));
        let best = KrrModel::objective(g.as_ref(), &m.coefficients, &d.y, lambda);
        for i in 0..10 {
            let mut a = m.coefficients.clone();
            a[i * 3] += if i % 2 == 0 { 1e-3 } else { -1e-3 };
            assert!(best <= KrrModel::objective(g.as_ref(), &a, &d.y, lambda) + 1e-10);
        }
    }

    #[test]
    fn objective_nondecreasing_in_lambda() {
        let (d, k) = periodic_data(30, 3);
        let g = k.gram(&d.x).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for e in -8..=2 {
            let lambda = 10f64.powi(e);
            let m = fit(&d, lambda, &k).unwrap();
            let obj = KrrModel::objective(g.as_ref(), &m.coefficients, &d.y, lambda);
            assert!(obj >= prev - 1e-12, "lambda={lambda}");
            prev = obj;
        }
    }

    #[test]
    fn predictions() {
        let k = KernelSpec::gaussian(0.5).unwrap();
        let zero = KrrModel::zero(vec![0.1, 0.5], 1.0, k);
        assert_eq!(zero.predict(0.3), 0.0);
        let one = KrrModel { support: vec![0.4], coefficients: vec![1.0], lambda: 1.0, kernel: k };
        assert_eq!(one.predict(0.4), 1.0);

        let (d, k) = periodic_data(10, 4);
        let m = fit(&d, 0.05, &k).unwrap();
        let probes = [0.0, 0.13, 0.5, 0.77, 0.999];
        let fast = m.predict_many(&probes);
        for (p, f) in probes.iter().zip(fast) {
            let direct: f64 = (0..10).map(|i| m.coefficients[i] * k.eval(d.x[i], *p).unwrap()).sum();
            assert!((m.predict(*p) - direct).abs() < 1e-12);
            assert!((f - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn rkhs_norms() {
        let k = KernelSpec::periodic_sobolev(1, 20).unwrap();
        let one = KrrModel { support: vec![0.3], coefficients: vec![-1.5], lambda: 1.0, kernel: k };
        let expect = 2.25 * k.eval(0.3, 0.3).unwrap();
        assert!((rkhs_norm_sq(&one).unwrap() - expect).abs() < 1e-12);

        let (d, k) = periodic_data(20, 5);
        let m = fit(&d, 0.02, &k).unwrap();
        let n2 = rkhs_norm_sq(&m).unwrap();
        assert!(rkhs_dist_sq(&m, &m).unwrap() <= 1e-12 * n2);
        let g = KrrModel { kernel: KernelSpec::gaussian(1.0).unwrap(), ..m.clone() };
        assert!(matches!(rkhs_dist_sq(&m, &g), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn mc_distance_basics() {
        assert_eq!(l2_dist_mc(|x| x * x, |x| x * x, 100, 1).unwrap(), 0.0);
        let d = l2_dist_mc(|_| 2.5, |_| -0.5, 10, 1).unwrap();
        assert_eq!(d, 3.0);
        assert!(l2_dist_mc(|_| 0.0, |_| 0.0, 0, 1).is_err());
        let a = l2_dist_mc(|x| x, |_| 0.0, 500, 8).unwrap();
        assert_eq!(a, l2_dist_mc(|x| x, |_| 0.0, 500, 8).unwrap());
    }

    #[test]
    fn model_csv_round_trip() {
        let (d, k) = periodic_data(12, 6);
        let m = fit(&d, 0.1, &k).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.csv");
        m.write_csv(&path).unwrap();
        assert_eq!(KrrModel::read_csv(&path).unwrap(), m);
    }
}
