//! Exact finite-rank realizations of the integral-operator machinery.
//!
//! For the truncated periodic Sobolev kernel, `H_K` has the orthonormal basis
//! `φ_ℓ = √μ_ℓ e_ℓ`. In those coordinates
//!
//! * `L_K` is `diag(μ)`,
//! * the empirical operator `L_{K,D(x)} = (1/N) Σ ⟨·, K_{x_i}⟩ K_{x_i}` is
//!   `(1/N) Σ v(x_i) v(x_i)ᵀ` with `v_ℓ(x) = √μ_ℓ e_ℓ(x)`,
//! * `K_x` is the vector `v(x)`, and RKHS norms are Euclidean norms.
//!
//! Everything below is plain `d × d` matrix algebra with `d = 2·k_max + 1`.
//! Operator norms are largest singular values, Hilbert-Schmidt norms are
//! Frobenius norms.

use faer::{Mat, MatRef};
use rand::Rng;

use crate::distributed::{fit_distributed, Partition};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::krr::{self, check_lambda};
use crate::linalg;
use crate::rng::{self, purpose};
use crate::synthetic::{Dataset, SpectralModel, TargetFunction};

/// `𝒩(λ) = Σ μ_ℓ / (μ_ℓ + λ)` from a list of eigenvalues.
pub fn effective_dimension_from_eigenvalues(eigenvalues: &[f64], lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    Ok(eigenvalues.iter().rev().map(|&mu| mu.max(0.0) / (mu.max(0.0) + lambda)).sum())
}

/// `𝒩(λ) = Tr((L_K + λ)⁻¹ L_K)` from the exact eigensystem.
pub fn effective_dimension_spectral(spec: &SpectralModel, lambda: f64) -> Result<f64> {
    effective_dimension_from_eigenvalues(spec.eigenvalues(), lambda)
}

/// `Tr((G/N)((G/N) + λI)⁻¹)`, the effective dimension of the empirical operator.
pub fn effective_dimension_empirical(gram: MatRef<'_, f64>, n: usize, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    if n == 0 {
        return Err(Error::arg("sample size must be positive"));
    }
    if !linalg::is_symmetric(gram) {
        return Err(Error::arg("gram matrix is not symmetric"));
    }
    let scaled: Vec<f64> = linalg::symmetric_eigenvalues(gram)?
        .into_iter()
        .map(|s| s / n as f64)
        .collect();
    effective_dimension_from_eigenvalues(&scaled, lambda)
}

/// Coefficients of `f_λ = (L_K + λ)⁻¹ L_K f_ρ` in the `e_ℓ` basis: `μ_ℓ c_ℓ / (μ_ℓ + λ)`.
pub fn f_lambda(spec: &SpectralModel, target: &TargetFunction, lambda: f64) -> Result<Vec<f64>> {
    check_lambda(lambda)?;
    check_target(spec, target)?;
    Ok(spec
        .eigenvalues()
        .iter()
        .zip(&target.coefficients)
        .map(|(mu, c)| mu * c / (mu + lambda))
        .collect())
}

/// `‖f_λ − f_ρ‖_ρ = √(Σ (λ/(μ_ℓ+λ))² c_ℓ²)`.
pub fn approximation_error(spec: &SpectralModel, target: &TargetFunction, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_target(spec, target)?;
    Ok(spec
        .eigenvalues()
        .iter()
        .zip(&target.coefficients)
        .rev()
        .map(|(mu, c)| (lambda / (mu + lambda) * c).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// `‖f_λ − f_ρ‖_K = √(Σ (λ/(μ_ℓ+λ))² c_ℓ² / μ_ℓ)`.
pub fn approximation_error_rkhs(spec: &SpectralModel, target: &TargetFunction, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    check_target(spec, target)?;
    Ok(spec
        .eigenvalues()
        .iter()
        .zip(&target.coefficients)
        .rev()
        .map(|(mu, c)| (lambda / (mu + lambda) * c).powi(2) / mu)
        .sum::<f64>()
        .sqrt())
}

fn check_target(spec: &SpectralModel, target: &TargetFunction) -> Result<()> {
    if target.coefficients.len() != spec.dim() {
        return Err(Error::arg("target and spectral model have different dimensions"));
    }
    Ok(())
}

/// `φ`-coordinates of a function given by `e_ℓ` coefficients: `a_ℓ / √μ_ℓ`.
pub fn phi_from_basis(spec: &SpectralModel, coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().zip(spec.eigenvalues()).map(|(a, mu)| a / mu.sqrt()).collect()
}

/// `e_ℓ` coefficients of a function given by `φ`-coordinates: `√μ_ℓ b_ℓ`.
pub fn basis_from_phi(spec: &SpectralModel, phi: &[f64]) -> Vec<f64> {
    phi.iter().zip(spec.eigenvalues()).map(|(b, mu)| b * mu.sqrt()).collect()
}

/// Matrix of `L_K`: `diag(μ)`.
pub fn population_operator(spec: &SpectralModel) -> Mat<f64> {
    let mu = spec.eigenvalues();
    Mat::from_fn(mu.len(), mu.len(), |i, j| if i == j { mu[i] } else { 0.0 })
}

/// Matrix of `L_{K,D(x)}`: `(1/N) Σ v(x_i) v(x_i)ᵀ`.
pub fn empirical_operator(spec: &SpectralModel, inputs: &[f64]) -> Result<Mat<f64>> {
    if inputs.is_empty() {
        return Err(Error::arg("empirical operator of an empty sample"));
    }
    let v = spec.kernel().feature_matrix(inputs)?;
    let mut s = linalg::inner_gram(v.as_ref());
    let n = inputs.len() as f64;
    for j in 0..s.ncols() {
        for i in 0..s.nrows() {
            s[(i, j)] /= n;
        }
    }
    Ok(s)
}

/// `‖L_{K,D(x)} − L_K‖_HS`.
pub fn empirical_operator_error(spec: &SpectralModel, inputs: &[f64]) -> Result<f64> {
    let mut s = empirical_operator(spec, inputs)?;
    for (i, mu) in spec.eigenvalues().iter().enumerate() {
        s[(i, i)] -= mu;
    }
    Ok(linalg::frobenius_norm(s.as_ref()))
}

/// Operator norm of `(A⁻¹ − B⁻¹) − [B⁻¹(B−A)B⁻¹ + B⁻¹(B−A)A⁻¹(B−A)B⁻¹]`.
///
/// The bracket is the exact second-order expansion of the inverse
/// difference, so the residual is pure round-off for well-conditioned inputs.
pub fn second_order_residual(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Result<f64> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(Error::arg("operands have different shapes"));
    }
    let a_inv = linalg::inverse(a)?;
    let b_inv = linalg::inverse(b)?;
    let diff = b - a;
    let first = &b_inv * &diff * &b_inv;
    let second = &b_inv * &diff * &a_inv * &diff * &b_inv;
    let lhs = &a_inv - &b_inv;
    let residual = lhs - first - second;
    linalg::operator_norm(residual.as_ref())
}

/// Mean of `(y − h(x)) v(x)` over a data subset, with `h` given by `e_ℓ` coefficients.
fn mean_weighted_features(
    spec: &SpectralModel,
    features: MatRef<'_, f64>,
    data: &Dataset,
    rows: &[usize],
    h: Option<&[f64]>,
    use_y: bool,
) -> Vec<f64> {
    let mut out = vec![0.0; spec.dim()];
    for &i in rows {
        let h_x = h.map_or(0.0, |c| spec.series_eval(c, data.x[i]));
        let w = if use_y { data.y[i] - h_x } else { -h_x };
        for (o, &v) in out.iter_mut().zip(features.row(i).iter()) {
            *o += w * v;
        }
    }
    let n = rows.len() as f64;
    out.iter_mut().for_each(|o| *o /= n);
    out
}

fn shifted_inverse(s: &Mat<f64>, lambda: f64) -> Result<Mat<f64>> {
    let mut a = s.clone();
    for i in 0..a.nrows() {
        a[(i, i)] += lambda;
    }
    linalg::inverse(a.as_ref())
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Check the representation of `f̄_{D,λ} − f_{D,λ}` by inverse-operator differences.
///
/// The left side comes from actually fitting both estimators (Gram-matrix
/// solves). Two right sides are assembled from `d × d` operators:
///
/// ```text
/// Σ_j w_j [(L_{K,D_j} + λ)⁻¹ − (L_{K,D} + λ)⁻¹] Δ_j
/// Σ_j w_j Q_{D_j} Δ'_j + Σ_j w_j Q_{D_j} Δ''_j − Q_D Δ_D
/// ```
///
/// with `Q = (L_{K,·} + λ)⁻¹ − (L_K + λ)⁻¹`, `Δ_j = mean_{D_j} ξ_λ − E[ξ_λ]`,
/// `ξ_λ(z) = (y − f_λ(x)) K_x`, `ξ_0(z) = (y − f_ρ(x)) K_x`,
/// `Δ'_j = mean_{D_j} ξ_0`, `Δ''_j = mean_{D_j} (ξ_λ − ξ_0) − E[ξ_λ]` and
/// `E[ξ_λ] = L_K (f_ρ − f_λ)` taken analytically.
///
/// Returns the larger RKHS distance between the fitted difference and either
/// right side.
pub fn verify_difference_representation(
    data: &Dataset,
    part: &Partition,
    lambda: f64,
    kernel: &KernelSpec,
    target: &TargetFunction,
    spec: &SpectralModel,
) -> Result<f64> {
    check_lambda(lambda)?;
    check_target(spec, target)?;
    if *kernel != spec.kernel() {
        return Err(Error::arg("kernel does not match the spectral model"));
    }

    // left side from the estimators themselves
    let batch = krr::fit(data, lambda, kernel)?;
    let averaged = fit_distributed(data, part, lambda, kernel)?;
    let lhs = sub(&averaged.model.phi_coordinates()?, &batch.phi_coordinates()?);

    let features = kernel.feature_matrix(&data.x)?;
    let mu = spec.eigenvalues();
    let f_lam = f_lambda(spec, target, lambda)?;
    let expected_xi: Vec<f64> = mu
        .iter()
        .zip(&target.coefficients)
        .map(|(m, c)| m.sqrt() * c * lambda / (m + lambda))
        .collect();
    let residual_lam = sub(&target.coefficients, &f_lam);

    let all: Vec<usize> = (0..data.len()).collect();
    let delta_d = sub(
        &mean_weighted_features(spec, features.as_ref(), data, &all, Some(&f_lam), true),
        &expected_xi,
    );
    let a_d_inv = shifted_inverse(&empirical_operator(spec, &data.x)?, lambda)?;
    let b_inv = Mat::<f64>::from_fn(mu.len(), mu.len(), |i, j| if i == j { 1.0 / (mu[i] + lambda) } else { 0.0 });
    let q_d = &a_d_inv - &b_inv;

    let mut first = vec![0.0; spec.dim()];
    let mut second = vec![0.0; spec.dim()];
    for (block, &w) in part.blocks.iter().zip(&part.weights) {
        let a_j_inv = shifted_inverse(&empirical_operator(spec, &data.subset(block).x)?, lambda)?;
        let delta_j = sub(
            &mean_weighted_features(spec, features.as_ref(), data, block, Some(&f_lam), true),
            &expected_xi,
        );
        let delta_prime = mean_weighted_features(spec, features.as_ref(), data, block, Some(&target.coefficients), true);
        // ξ_λ − ξ_0 = (f_ρ(x) − f_λ(x)) K_x
        let mut delta_second = mean_weighted_features(spec, features.as_ref(), data, block, Some(&residual_lam), false);
        delta_second.iter_mut().for_each(|v| *v = -*v);
        let delta_second = sub(&delta_second, &expected_xi);

        let diff_op = &a_j_inv - &a_d_inv;
        let q_j = &a_j_inv - &b_inv;
        let t1 = linalg::mat_vec(diff_op.as_ref(), &delta_j);
        let t2 = linalg::mat_vec(q_j.as_ref(), &delta_prime);
        let t3 = linalg::mat_vec(q_j.as_ref(), &delta_second);
        for l in 0..spec.dim() {
            first[l] += w * t1[l];
            second[l] += w * (t2[l] + t3[l]);
        }
    }
    let q_d_delta = linalg::mat_vec(q_d.as_ref(), &delta_d);
    let second = sub(&second, &q_d_delta);

    let e1 = linalg::norm(&sub(&first, &lhs));
    let e2 = linalg::norm(&sub(&second, &lhs));
    Ok(e1.max(e2))
}

/// Monte-Carlo check of the operator concentration bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub lambda: f64,
    pub n: usize,
    pub n_trials: usize,
    pub delta: f64,
    /// Per-trial `Ξ_D = ‖(L_K+λ)^(-1/2)(L_K − L_{K,D(x)})‖`.
    pub xi: Vec<f64>,
    /// Mean of `Ξ_D²`.
    pub op_sq_mean: f64,
    /// Mean and standard error of `‖(L_K+λ)^(-1/2)(L_K − L_{K,D(x)})‖²_HS`.
    pub hs_sq_mean: f64,
    pub hs_sq_stderr: f64,
    /// Exact expectation of the squared HS norm, `(κ²𝒩(λ) − Σ μ²/(μ+λ)) / N`.
    pub hs_sq_expected: f64,
    /// `κ² 𝒩(λ) / N`
    pub bound_a: f64,
    /// `ℬ_{N,λ} = (2κ/√N)(κ/√(Nλ) + √𝒩(λ))`
    pub b_const: f64,
    /// Trials with `Ξ_D > ℬ_{N,λ} log(2/δ)`.
    pub violations_b: usize,
    pub effective_dimension: f64,
    /// Mean and standard error of `‖(L_K+λ)^(-1/2) K_x‖²_K` over every drawn input.
    pub kx_norm_sq_mean: f64,
    pub kx_norm_sq_stderr: f64,
}

impl ConcentrationReport {
    /// Squared-HS mean within the expectation bound.
    pub fn holds_a(&self) -> bool {
        self.hs_sq_mean <= self.bound_a
    }

    /// Operator-norm version, implied by the HS version.
    pub fn holds_a_operator(&self) -> bool {
        self.op_sq_mean <= self.bound_a
    }

    pub fn violation_rate_b(&self) -> f64 {
        self.violations_b as f64 / self.n_trials as f64
    }

    /// Whether the observed (b) violation rate is within `δ + 2` binomial standard errors.
    pub fn holds_b(&self) -> bool {
        let se = (self.delta * (1.0 - self.delta) / self.n_trials as f64).sqrt();
        self.violation_rate_b() <= self.delta + 2.0 * se
    }

    /// `|mean ‖(L_K+λ)^(-1/2)K_x‖² − 𝒩(λ)|` in standard errors.
    ///
    /// For the periodic kernel the quantity does not depend on `x`
    /// (`cos² + sin² = 1` per frequency), so the sample spread is pure
    /// round-off; the standard error is floored at `1e-9·𝒩(λ)` to keep the
    /// ratio meaningful.
    pub fn kx_norm_z(&self) -> f64 {
        let gap = (self.kx_norm_sq_mean - self.effective_dimension).abs();
        gap / self.kx_norm_sq_stderr.max(1e-9 * self.effective_dimension.max(1.0))
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Draw `n_trials` samples of size `n` and measure the concentration of the
/// empirical operator around `L_K`.
pub fn concentration_check(
    spec: &SpectralModel,
    lambda: f64,
    n: usize,
    n_trials: usize,
    delta: f64,
    seed: u64,
) -> Result<ConcentrationReport> {
    check_lambda(lambda)?;
    if n == 0 {
        return Err(Error::arg("sample size must be positive"));
    }
    if n_trials < 100 {
        return Err(Error::arg(format!("need at least 100 trials, got {n_trials}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::arg(format!("confidence level delta must lie in (0, 1), got {delta}")));
    }
    let kernel = spec.kernel();
    let mu = spec.eigenvalues();
    let kappa = kernel.kappa();
    let eff = effective_dimension_spectral(spec, lambda)?;
    let nf = n as f64;
    let bound_a = kappa * kappa * eff / nf;
    let b_const = 2.0 * kappa / nf.sqrt() * (kappa / (nf * lambda).sqrt() + eff.sqrt());
    let threshold_b = b_const * (2.0 / delta).ln();
    let scale: Vec<f64> = mu.iter().map(|m| 1.0 / (m + lambda).sqrt()).collect();
    let hs_sq_expected = (kappa * kappa * eff - mu.iter().map(|m| m * m / (m + lambda)).sum::<f64>()) / nf;

    let mut xi = Vec::with_capacity(n_trials);
    let mut op_sq = Vec::with_capacity(n_trials);
    let mut hs_sq = Vec::with_capacity(n_trials);
    let mut kx = Vec::with_capacity(n_trials * n);
    for t in 0..n_trials {
        let mut rng = rng::stream(seed, &[purpose::CONCENTRATION, n as u64, t as u64]);
        let inputs: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let v = kernel.feature_matrix(&inputs)?;
        for i in 0..n {
            kx.push(v.row(i).iter().zip(&scale).map(|(x, s)| (x * s).powi(2)).sum());
        }
        let mut m = linalg::inner_gram(v.as_ref());
        for j in 0..m.ncols() {
            for i in 0..m.nrows() {
                let pop = if i == j { mu[i] } else { 0.0 };
                m[(i, j)] = scale[i] * (pop - m[(i, j)] / nf);
            }
        }
        let op = linalg::operator_norm(m.as_ref())?;
        xi.push(op);
        op_sq.push(op * op);
        hs_sq.push(linalg::frobenius_norm(m.as_ref()).powi(2));
    }
    let (op_sq_mean, _) = mean_and_stderr(&op_sq);
    let (hs_sq_mean, hs_sq_stderr) = mean_and_stderr(&hs_sq);
    let (kx_norm_sq_mean, kx_norm_sq_stderr) = mean_and_stderr(&kx);
    let violations_b = xi.iter().filter(|&&x| x > threshold_b).count();
    Ok(ConcentrationReport {
        lambda,
        n,
        n_trials,
        delta,
        xi,
        op_sq_mean,
        hs_sq_mean,
        hs_sq_stderr,
        hs_sq_expected,
        bound_a,
        b_const,
        violations_b,
        effective_dimension: eff,
        kx_norm_sq_mean,
        kx_norm_sq_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributed::{partition, PartitionStrategy};
    use crate::synthetic::{make_source_target, make_spectral, sample_dataset, NoiseModel};

    fn spec(s: u32, k_max: usize) -> SpectralModel {
        make_spectral(&KernelSpec::periodic_sobolev(s, k_max).unwrap()).unwrap()
    }

    #[test]
    fn effective_dimension_small_cases() {
        assert_eq!(effective_dimension_from_eigenvalues(&[1.0], 1.0).unwrap(), 0.5);
        let sp = spec(1, 10);
        let tiny = effective_dimension_spectral(&sp, 1e-14).unwrap();
        assert!((tiny - sp.dim() as f64).abs() < 1e-9);
        assert!(effective_dimension_spectral(&sp, 0.0).is_err());
        assert!(effective_dimension_spectral(&sp, -1.0).is_err());
    }

    #[test]
    fn effective_dimension_square_root_law() {
        // 1/(1+λ) + Σ_{k≤K} 2/(1+λk²) ≈ π/√λ for K√λ ≫ 1
        let sp = spec(1, 1_000_000);
        let eff = effective_dimension_spectral(&sp, 1e-4).unwrap();
        let approx = std::f64::consts::PI / 1e-2;
        assert!((eff - approx).abs() / approx < 0.01, "{eff}");
    }

    #[test]
    fn empirical_effective_dimension_closed_forms() {
        let n = 7;
        let g = Mat::<f64>::from_fn(n, n, |i, j| if i == j { n as f64 } else { 0.0 });
        assert!((effective_dimension_empirical(g.as_ref(), n, 1.0).unwrap() - n as f64 / 2.0).abs() < 1e-12);
        let g = Mat::<f64>::identity(n, n);
        let expect = n as f64 / (n as f64 + 1.0);
        assert!((effective_dimension_empirical(g.as_ref(), n, 1.0).unwrap() - expect).abs() < 1e-12);
        let mut asym = Mat::<f64>::identity(3, 3);
        asym[(0, 1)] = 0.5;
        assert!(effective_dimension_empirical(asym.as_ref(), 3, 1.0).is_err());
    }

    #[test]
    fn data_free_limit_small_lambda() {
        let sp = spec(1, 50);
        let t = make_source_target(&sp, 0.5, 1.0, 0).unwrap();
        assert!(approximation_error(&sp, &t, 1e-12).unwrap() < 1e-8);
        let fl = f_lambda(&sp, &t, 1e-12).unwrap();
        assert!(fl.iter().zip(&t.coefficients).all(|(a, b)| (a - b).abs() < 1e-8));
    }

    #[test]
    fn data_free_limit_single_mode_padded() {
        let sp = spec(1, 1);
        let t = TargetFunction::from_source(sp.eigenvalues(), 0.5, &[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(f_lambda(&sp, &t, 1.0).unwrap(), vec![0.5, 0.0, 0.0]);
        assert_eq!(approximation_error(&sp, &t, 1.0).unwrap(), 0.5);
    }

    #[test]
    fn second_order_small_cases() {
        let a = Mat::<f64>::from_fn(1, 1, |_, _| 2.0);
        let b = Mat::<f64>::from_fn(1, 1, |_, _| 1.0);
        assert_eq!(second_order_residual(a.as_ref(), b.as_ref()).unwrap(), 0.0);
        assert_eq!(second_order_residual(a.as_ref(), a.as_ref()).unwrap(), 0.0);
        let z = Mat::<f64>::zeros(2, 2);
        let i = Mat::<f64>::identity(2, 2);
        assert!(matches!(second_order_residual(z.as_ref(), i.as_ref()), Err(Error::Singular(_))));
    }

    #[test]
    fn difference_representation_single_block_is_zero() {
        let sp = spec(1, 10);
        let k = sp.kernel();
        let t = make_source_target(&sp, 0.5, 1.0, 0).unwrap();
        let d = sample_dataset(&t, &sp, &NoiseModel::BoundedUniform { half_width: 0.3 }, 25, 1).unwrap();
        let p = partition(25, 1, PartitionStrategy::Contiguous).unwrap();
        assert!(verify_difference_representation(&d, &p, 0.1, &k, &t, &sp).unwrap() <= 1e-12);
    }

    #[test]
    fn difference_representation_three_blocks() {
        let sp = spec(1, 30);
        let k = sp.kernel();
        let t = make_source_target(&sp, 0.5, 1.0, 4).unwrap();
        let d = sample_dataset(&t, &sp, &NoiseModel::BoundedUniform { half_width: 0.5 }, 60, 2).unwrap();
        let p = partition(60, 3, PartitionStrategy::Shuffled { seed: 5 }).unwrap();
        let f_norm = krr::rkhs_norm_sq(&krr::fit(&d, 0.1, &k).unwrap()).unwrap().sqrt();
        let disc = verify_difference_representation(&d, &p, 0.1, &k, &t, &sp).unwrap();
        assert!(disc <= 1e-8 * (1.0 + f_norm), "{disc}");
    }

    #[test]
    fn difference_representation_noiseless_single_mode() {
        let sp = spec(1, 8);
        let k = sp.kernel();
        let mut g = vec![0.0; sp.dim()];
        g[3] = 1.0;
        let t = TargetFunction::from_source(sp.eigenvalues(), 1.0, &g).unwrap();
        let d = sample_dataset(&t, &sp, &NoiseModel::BoundedUniform { half_width: 0.0 }, 40, 3).unwrap();
        let p = partition(40, 4, PartitionStrategy::Contiguous).unwrap();
        assert!(verify_difference_representation(&d, &p, 0.05, &k, &t, &sp).unwrap() <= 1e-8);
    }

    #[test]
    fn concentration_trivial_regime() {
        let sp = spec(1, 10);
        let r = concentration_check(&sp, 1e9, 20, 100, 0.05, 1).unwrap();
        assert!(r.effective_dimension < 1e-8);
        assert!(r.xi.iter().all(|&x| x < 1e-3));
        assert!(r.holds_a());
        assert_eq!(r.violations_b, 0);
        assert!(concentration_check(&sp, 0.1, 20, 99, 0.05, 1).is_err());
    }

    #[test]
    fn concentration_moderate_regime() {
        let sp = spec(1, 50);
        let r = concentration_check(&sp, 0.01, 500, 500, 0.05, 7).unwrap();
        assert!(r.holds_a(), "{} > {}", r.hs_sq_mean, r.bound_a);
        assert!(r.holds_a_operator());
        assert!(r.holds_b());
        assert!(r.kx_norm_z() <= 3.0, "z={}", r.kx_norm_z());
        assert!((r.hs_sq_mean - r.hs_sq_expected).abs() <= 4.0 * r.hs_sq_stderr);
        assert!(r.op_sq_mean <= r.hs_sq_mean);
    }

    #[test]
    fn empirical_operator_trace() {
        let sp = spec(1, 12);
        let xs = [0.1, 0.45, 0.8, 0.33];
        let s = empirical_operator(&sp, &xs).unwrap();
        let tr: f64 = (0..sp.dim()).map(|i| s[(i, i)]).sum();
        let k = sp.kernel();
        let expect: f64 = xs.iter().map(|&x| k.eval(x, x).unwrap()).sum::<f64>() / 4.0;
        assert!((tr - expect).abs() < 1e-12);
        let eig = linalg::symmetric_eigenvalues(s.as_ref()).unwrap();
        assert!(eig[0] >= -1e-10);
    }
}
