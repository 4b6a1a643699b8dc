//! Thin dense linear-algebra layer over `faer`.
//!
//! Every routine here runs with sequential parallelism. Parallel work in this
//! crate happens one level up (across blocks and trials), which keeps results
//! bit-identical regardless of how many worker threads are available.

use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::cholesky::llt;
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::triangular::{matmul as triangular_matmul, BlockStructure};
use faer::linalg::solvers::DenseSolveCore;
use faer::{Accum, Conj, Mat, MatRef, Par};

use crate::error::{Error, Result};

/// Lower triangle of `V Vᵀ`, mirrored to a bit-exact symmetric matrix.
pub fn outer_gram(features: MatRef<'_, f64>) -> Mat<f64> {
    let n = features.nrows();
    let mut g = Mat::<f64>::zeros(n, n);
    triangular_matmul(
        g.as_mut(),
        BlockStructure::TriangularLower,
        Accum::Replace,
        features,
        BlockStructure::Rectangular,
        features.transpose(),
        BlockStructure::Rectangular,
        1.0,
        Par::Seq,
    );
    mirror_lower(&mut g);
    g
}

/// `Vᵀ V` for a tall feature matrix, symmetric by construction.
pub fn inner_gram(features: MatRef<'_, f64>) -> Mat<f64> {
    outer_gram(features.transpose())
}

pub fn mirror_lower(m: &mut Mat<f64>) {
    let n = m.nrows();
    for j in 0..n {
        for i in (j + 1)..n {
            m[(j, i)] = m[(i, j)];
        }
    }
}

/// Solve `(G + shift·I) x = rhs` by Cholesky. `gram` is consumed as workspace.
///
/// A non-positive pivot surfaces as [`Error::NotPositiveDefinite`]; no jitter
/// is ever added.
pub fn solve_shifted_spd(mut gram: Mat<f64>, shift: f64, rhs: &[f64]) -> Result<Vec<f64>> {
    let n = gram.nrows();
    if gram.ncols() != n || rhs.len() != n {
        return Err(Error::arg(format!(
            "system of size {}x{} with rhs of length {}",
            gram.nrows(),
            gram.ncols(),
            rhs.len()
        )));
    }
    for i in 0..n {
        gram[(i, i)] += shift;
    }
    if !shift.is_finite() || gram.as_ref().has_nan() {
        return Err(Error::NotPositiveDefinite {
            pivot: 0,
            block: None,
        });
    }
    let mut mem = MemBuffer::new(llt::factor::cholesky_in_place_scratch::<f64>(
        n,
        Par::Seq,
        Default::default(),
    ));
    llt::factor::cholesky_in_place(
        gram.as_mut(),
        Default::default(),
        Par::Seq,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| match e {
        llt::factor::LltError::NonPositivePivot { index } => Error::NotPositiveDefinite {
            pivot: index,
            block: None,
        },
    })?;

    let mut x = Mat::<f64>::from_fn(n, 1, |i, _| rhs[i]);
    let mut mem = MemBuffer::new(llt::solve::solve_in_place_scratch::<f64>(n, 1, Par::Seq));
    llt::solve::solve_in_place_with_conj(
        gram.as_ref(),
        Conj::No,
        x.as_mut(),
        Par::Seq,
        MemStack::new(&mut mem),
    );
    Ok((0..n).map(|i| x[(i, 0)]).collect())
}

/// Eigenvalues of a symmetric matrix in non-decreasing order.
pub fn symmetric_eigenvalues(a: MatRef<'_, f64>) -> Result<Vec<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::arg("eigenvalues of a non-square matrix"));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut s = faer::diag::Diag::<f64>::zeros(n);
    let mut mem = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::No,
        Par::Seq,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        None,
        Par::Seq,
        MemStack::new(&mut mem),
        Default::default(),
    )
    .map_err(|e| Error::Singular(format!("eigensolver did not converge: {e:?}")))?;
    let mut values: Vec<f64> = (0..n).map(|i| s[i]).collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Largest singular value, via the top eigenvalue of `A Aᵀ`.
pub fn operator_norm(a: MatRef<'_, f64>) -> Result<f64> {
    let aat = outer_gram(a);
    let top = symmetric_eigenvalues(aat.as_ref())?
        .last()
        .copied()
        .unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

pub fn frobenius_norm(a: MatRef<'_, f64>) -> f64 {
    a.norm_l2()
}

pub fn is_symmetric(a: MatRef<'_, f64>) -> bool {
    let n = a.nrows();
    if a.ncols() != n {
        return false;
    }
    (0..n).all(|j| (j + 1..n).all(|i| a[(i, j)] == a[(j, i)]))
}

/// Inverse of a general square matrix by partially pivoted LU.
///
/// Singularity is detected from non-finite output or a failed `A·A⁻¹ ≈ I`
/// round trip.
pub fn inverse(a: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::arg("inverse of a non-square matrix"));
    }
    let inv = a.partial_piv_lu().inverse();
    if inv.as_ref().has_nan() || !inv.as_ref().is_all_finite() {
        return Err(Error::Singular("LU produced non-finite entries".into()));
    }
    let mut check = &a * &inv;
    for i in 0..n {
        check[(i, i)] -= 1.0;
    }
    let err = check.norm_max();
    if !(err <= 1e-6) {
        return Err(Error::Singular(format!(
            "inverse round-trip error {err:e} exceeds 1e-6"
        )));
    }
    Ok(inv)
}

pub fn mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.ncols(), x.len());
    let mut out = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let col = a.col(j);
        for (o, &aij) in out.iter_mut().zip(col.iter()) {
            *o += aij * xj;
        }
    }
    out
}

pub fn transpose_mat_vec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.nrows(), x.len());
    (0..a.ncols())
        .map(|j| a.col(j).iter().zip(x).map(|(aij, xi)| aij * xi).sum())
        .collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
