//! Cross-checks against an independent dense linear-algebra implementation.

use dac_krr::krr::{fit, rkhs_dist_sq, rkhs_norm_sq, KrrModel};
use dac_krr::operator_lab::{effective_dimension_empirical, phi_from_basis};
use dac_krr::{make_source_target, make_spectral, sample_dataset, KernelSpec, NoiseModel};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

fn gram_na(kernel: &KernelSpec, x: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(x.len(), x.len(), |i, j| kernel.eval(x[i], x[j]).unwrap())
}

fn uniform(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = dac_krr::rng::stream(seed, &[77]);
    (0..n).map(|_| rng.random::<f64>()).collect()
}

#[test]
fn coefficients_match_dense_solve() {
    for (kernel, seed) in [
        (KernelSpec::periodic_sobolev(1, 40).unwrap(), 1),
        (KernelSpec::periodic_sobolev(2, 15).unwrap(), 2),
        (KernelSpec::gaussian(0.3).unwrap(), 3),
    ] {
        let x = uniform(30, seed);
        let mut rng = dac_krr::rng::stream(seed, &[78]);
        let y: Vec<f64> = (0..30).map(|_| rng.random::<f64>() - 0.5).collect();
        let data = dac_krr::Dataset::new(x.clone(), y.clone()).unwrap();
        let lambda = 1e-3;
        let model = fit(&data, lambda, &kernel).unwrap();

        let a = gram_na(&kernel, &x) + DMatrix::identity(30, 30) * (30.0 * lambda);
        let expect = a.lu().solve(&DVector::from_vec(y)).unwrap();
        let scale = expect.amax();
        for (got, want) in model.coefficients.iter().zip(expect.iter()) {
            assert!((got - want).abs() <= 1e-8 * scale, "{kernel:?}: {got} vs {want}");
        }
    }
}

#[test]
fn gaussian_gram_is_positive_semidefinite() {
    let kernel = KernelSpec::gaussian(1.0).unwrap();
    let x = uniform(20, 4);
    let g = kernel.gram(&x).unwrap();
    let g_na = DMatrix::from_fn(20, 20, |i, j| g[(i, j)]);
    let eig = g_na.symmetric_eigen();
    assert!(eig.eigenvalues.min() >= -1e-10, "{}", eig.eigenvalues.min());
}

#[test]
fn gram_matches_pointwise_kernel() {
    let kernel = KernelSpec::periodic_sobolev(1, 300).unwrap();
    let x = uniform(25, 5);
    let g = kernel.gram(&x).unwrap();
    let g_na = gram_na(&kernel, &x);
    for i in 0..25 {
        for j in 0..25 {
            assert!((g[(i, j)] - g_na[(i, j)]).abs() < 1e-10);
            assert_eq!(g[(i, j)], g[(j, i)]);
        }
    }
}

#[test]
fn rkhs_distance_matches_spectral_coordinates() {
    let kernel = KernelSpec::periodic_sobolev(1, 20).unwrap();
    let spec = make_spectral(&kernel).unwrap();
    let target = make_source_target(&spec, 0.5, 1.0, 0).unwrap();
    let noise = NoiseModel::BoundedUniform { half_width: 0.3 };
    let a = fit(&sample_dataset(&target, &spec, &noise, 40, 1).unwrap(), 1e-2, &kernel).unwrap();
    let b = fit(&sample_dataset(&target, &spec, &noise, 35, 2).unwrap(), 3e-3, &kernel).unwrap();

    // ‖f‖²_K = Σ c_ℓ² / μ_ℓ with c the coordinates in the orthonormal L² basis
    let coords = |m: &KrrModel| -> Vec<f64> {
        let phi = m.phi_coordinates().unwrap();
        phi.iter().zip(spec.eigenvalues()).map(|(p, mu)| p * mu.sqrt()).collect()
    };
    let (ca, cb) = (coords(&a), coords(&b));
    let spectral: f64 = ca
        .iter()
        .zip(&cb)
        .zip(spec.eigenvalues())
        .map(|((x, y), mu)| (x - y).powi(2) / mu)
        .sum();
    let direct = rkhs_dist_sq(&a, &b).unwrap();
    assert!((direct - spectral).abs() <= 1e-6 * spectral.max(1.0), "{direct} vs {spectral}");

    let norm_spec: f64 = ca.iter().zip(spec.eigenvalues()).map(|(c, mu)| c * c / mu).sum();
    assert!((rkhs_norm_sq(&a).unwrap() - norm_spec).abs() <= 1e-8 * norm_spec);
    assert_eq!(phi_from_basis(&spec, &ca).len(), spec.dim());
}

#[test]
fn empirical_effective_dimension_matches_dense_eigenvalues() {
    let kernel = KernelSpec::periodic_sobolev(1, 100).unwrap();
    let x = uniform(60, 6);
    let g = kernel.gram(&x).unwrap();
    let g_na = gram_na(&kernel, &x) / 60.0;
    let lambda = 0.01;
    let expect: f64 = g_na.symmetric_eigen().eigenvalues.iter().map(|s| s.max(0.0) / (s.max(0.0) + lambda)).sum();
    let got = effective_dimension_empirical(g.as_ref(), 60, lambda).unwrap();
    assert!((got - expect).abs() < 1e-8, "{got} vs {expect}");
}
