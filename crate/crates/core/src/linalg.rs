//! Dense linear-algebra helpers shared by the solver and the graph code.

use std::cmp::Ordering;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Result, UimcError};

const EIGEN_MAX_SWEEPS: usize = 100_000;
const TIE_TOL: f64 = 1e-12;

/// Eigenpairs of a symmetric matrix in a reproducible order.
#[derive(Debug, Clone)]
pub struct SortedEigen {
    pub values: DVector<f64>,
    /// Eigenvectors as columns, matching `values`.
    pub vectors: DMatrix<f64>,
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn fix_sign(mut v: DVector<f64>) -> DVector<f64> {
    let mut best = 0;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if !v.is_empty() && v[best] < 0.0 {
        v.neg_mut();
    }
    v
}

fn lexicographic(a: &DVector<f64>, b: &DVector<f64>) -> Ordering {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Eigendecomposition of the symmetric part of `mat`, sorted by eigenvalue
/// (ascending, or descending when `descending`), with numerically tied
/// eigenvalues ordered by lexicographic comparison of their sign-fixed
/// eigenvectors.
pub fn sorted_eigen(mat: &DMatrix<f64>, descending: bool) -> Result<SortedEigen> {
    if !mat.is_square() {
        return Err(UimcError::shape(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    if mat.iter().any(|v| !v.is_finite()) {
        return Err(UimcError::numerical("symmetric eigendecomposition", "non-finite input"));
    }
    let sym = (mat + mat.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, EIGEN_MAX_SWEEPS)
        .ok_or_else(|| UimcError::numerical("symmetric eigendecomposition", "QR sweeps did not converge"))?;
    let n = eig.eigenvalues.len();
    let mut pairs: Vec<(f64, DVector<f64>)> = (0..n)
        .map(|i| {
            let value = if descending {
                -eig.eigenvalues[i]
            } else {
                eig.eigenvalues[i]
            };
            (value, fix_sign(eig.eigenvectors.column(i).into_owned()))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = pairs.iter().map(|p| p.0.abs()).fold(1.0, f64::max);
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && pairs[end].0 - pairs[start].0 <= TIE_TOL * scale {
            end += 1;
        }
        if end - start > 1 {
            pairs[start..end].sort_by(|a, b| lexicographic(&a.1, &b.1));
        }
        start = end;
    }
    let values = DVector::from_iterator(n, pairs.iter().map(|p| if descending { -p.0 } else { p.0 }));
    let mut vectors = DMatrix::zeros(n, n);
    for (i, (_, v)) in pairs.iter().enumerate() {
        vectors.set_column(i, v);
    }
    Ok(SortedEigen { values, vectors })
}

/// The `k` eigenvectors with the smallest eigenvalues, as orthonormal columns.
pub fn smallest_eigenvectors(mat: &DMatrix<f64>, k: usize) -> Result<(DVector<f64>, DMatrix<f64>)> {
    extreme_eigenvectors(mat, k, false)
}

/// The `k` eigenvectors with the largest eigenvalues, as orthonormal columns.
pub fn largest_eigenvectors(mat: &DMatrix<f64>, k: usize) -> Result<(DVector<f64>, DMatrix<f64>)> {
    extreme_eigenvectors(mat, k, true)
}

fn extreme_eigenvectors(mat: &DMatrix<f64>, k: usize, descending: bool) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if k > mat.nrows() {
        return Err(UimcError::invalid(format!(
            "requested {k} eigenvectors of a {}x{} matrix",
            mat.nrows(),
            mat.ncols()
        )));
    }
    let eig = sorted_eigen(mat, descending)?;
    Ok((
        eig.values.rows(0, k).into_owned(),
        eig.vectors.columns(0, k).into_owned(),
    ))
}

/// `‖FᵀF − I‖_F`.
/// Scales every nonzero column to unit Euclidean norm.
pub fn normalize_columns(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = x.clone();
    for mut col in out.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    out
}

pub fn orthonormality_error(f: &DMatrix<f64>) -> f64 {
    let gram = f.transpose() * f;
    (gram - DMatrix::identity(f.ncols(), f.ncols())).norm()
}

/// `F Fᵀ`.
pub fn projector(f: &DMatrix<f64>) -> DMatrix<f64> {
    f * f.transpose()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_and_orthonormal() {
        let a = DMatrix::from_row_slice(3, 3, &[2., 1., 0., 1., 2., 0., 0., 0., 5.]);
        let e = sorted_eigen(&a, false).unwrap();
        let expected = [1.0, 3.0, 5.0];
        for (v, x) in e.values.iter().zip(expected) {
            assert!((v - x).abs() < 1e-12);
        }
        assert!(orthonormality_error(&e.vectors) < 1e-12);
        let (vals, vecs) = largest_eigenvectors(&a, 1).unwrap();
        assert!((vals[0] - 5.0).abs() < 1e-12);
        assert!((vecs[(2, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn signs_are_fixed() {
        let v = fix_sign(DVector::from_vec(vec![0.1, -0.9, 0.3]));
        assert_eq!(v.as_slice(), &[-0.1, 0.9, -0.3]);
    }

    #[test]
    fn ties_are_ordered_deterministically() {
        let a = DMatrix::<f64>::identity(4, 4);
        let e1 = sorted_eigen(&a, false).unwrap();
        let e2 = sorted_eigen(&a.clone(), false).unwrap();
        assert_eq!(e1.vectors, e2.vectors);
        for i in 1..4 {
            let prev = e1.vectors.column(i - 1).into_owned();
            let cur = e1.vectors.column(i).into_owned();
            assert_ne!(lexicographic(&prev, &cur), Ordering::Greater);
        }
    }

    #[test]
    fn rejects_non_finite() {
        let a = DMatrix::from_row_slice(2, 2, &[1., f64::NAN, f64::NAN, 1.]);
        assert!(matches!(sorted_eigen(&a, false), Err(UimcError::Numerical { .. })));
    }
}
