//! Affinity graphs lifted from a view's presented instances to all `m`
//! instances, so that views with different numbers of presented instances
//! yield Laplacians of a common size.

use nalgebra::{DMatrix, DVector};

use crate::dataset::IndicatorMatrix;
use crate::{Result, UimcError};

/// `m × m` affinity `W`, degrees `D` and Laplacian `L = D − W`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedLaplacian {
    pub affinity: DMatrix<f64>,
    pub degree: DVector<f64>,
    pub laplacian: DMatrix<f64>,
}

impl EmbeddedLaplacian {
    /// `xᵀ L x`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> f64 {
        x.dot(&(&self.laplacian * x))
    }

    /// `tr(Fᵀ L F)`.
    pub fn trace_form(&self, f: &DMatrix<f64>) -> f64 {
        (f.transpose() * &self.laplacian * f).trace()
    }
}

/// Builds `W = (|Mᵀ A M| + |Mᵀ Aᵀ M|) / 2` and its Laplacian.
///
/// Rows and columns of instances missing from the view are zero.
pub fn embed_affinity(a: &DMatrix<f64>, indicator: &IndicatorMatrix) -> Result<EmbeddedLaplacian> {
    let k = indicator.k();
    if a.shape() != (k, k) {
        return Err(UimcError::shape(format!(
            "subspace matrix is {}x{}, indicator has {k} presented instances",
            a.nrows(),
            a.ncols()
        )));
    }
    let inner = DMatrix::from_fn(k, k, |i, j| 0.5 * (a[(i, j)].abs() + a[(j, i)].abs()));
    Ok(laplacian_from_affinity(indicator.lift_square(&inner)))
}

/// Laplacian of an already symmetric nonnegative affinity.
pub fn laplacian_from_affinity(affinity: DMatrix<f64>) -> EmbeddedLaplacian {
    let degree = DVector::from_iterator(affinity.nrows(), affinity.row_iter().map(|r| r.sum()));
    let laplacian = DMatrix::from_diagonal(&degree) - &affinity;
    EmbeddedLaplacian {
        affinity,
        degree,
        laplacian,
    }
}

/// Row-stochastic k-nearest-neighbour affinity over the columns of `x`
/// (`d × n`), using cosine similarity. Each row puts weight on its
/// `neighbours` most similar columns in proportion to their (nonnegative)
/// similarity; the diagonal is zero.
pub fn knn_affinity(x: &DMatrix<f64>, neighbours: usize) -> DMatrix<f64> {
    let n = x.ncols();
    let mut out = DMatrix::zeros(n, n);
    if n < 2 || neighbours == 0 {
        return out;
    }
    let norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    let gram = x.transpose() * x;
    let cosine = |i: usize, j: usize| {
        let denom = norms[i] * norms[j];
        if denom > 0.0 {
            gram[(i, j)] / denom
        } else {
            0.0
        }
    };
    let k = neighbours.min(n - 1);
    for i in 0..n {
        let mut cands: Vec<(usize, f64)> = (0..n).filter(|&j| j != i).map(|j| (j, cosine(i, j))).collect();
        cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        cands.truncate(k);
        let total: f64 = cands.iter().map(|c| c.1.max(0.0)).sum();
        for &(j, s) in &cands {
            out[(i, j)] = if total > 0.0 {
                s.max(0.0) / total
            } else {
                1.0 / k as f64
            };
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::dataset::build_indicator;

    #[test]
    fn zero_affinity() {
        let ind = build_indicator(&[0, 2, 3], 5).unwrap();
        let g = embed_affinity(&DMatrix::zeros(3, 3), &ind).unwrap();
        assert_eq!(g.affinity, DMatrix::zeros(5, 5));
        assert_eq!(g.laplacian, DMatrix::zeros(5, 5));
    }

    #[test]
    fn symmetric_nonnegative_passes_through() {
        let a = DMatrix::from_row_slice(3, 3, &[0., 1., 2., 1., 0., 3., 2., 3., 0.]);
        let g = embed_affinity(&a, &IndicatorMatrix::identity(3)).unwrap();
        assert_eq!(g.affinity, a);
    }

    #[test]
    fn hand_case() {
        let a = DMatrix::from_row_slice(2, 2, &[0., 1., 0., 0.]);
        let g = embed_affinity(&a, &IndicatorMatrix::identity(2)).unwrap();
        assert_eq!(g.affinity, DMatrix::from_row_slice(2, 2, &[0., 0.5, 0.5, 0.]));
        assert_eq!(g.degree.as_slice(), &[0.5, 0.5]);
        assert_eq!(g.laplacian, DMatrix::from_row_slice(2, 2, &[0.5, -0.5, -0.5, 0.5]));
    }

    #[test]
    fn missing_rows_are_zero() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, -1., 2., 0.]);
        let g = embed_affinity(&a, &build_indicator(&[1, 3], 4).unwrap()).unwrap();
        for j in [0, 2] {
            assert!(g.affinity.row(j).iter().all(|&v| v == 0.0));
            assert!(g.affinity.column(j).iter().all(|&v| v == 0.0));
        }
        assert_eq!(g.affinity[(1, 3)], 1.5);
        assert_eq!(g.affinity[(1, 1)], 0.3);
    }

    #[test]
    fn shape_mismatch() {
        let ind = build_indicator(&[0, 1], 3).unwrap();
        assert!(embed_affinity(&DMatrix::zeros(3, 3), &ind).is_err());
    }

    #[test]
    fn knn_rows_are_stochastic() {
        let x = DMatrix::from_fn(3, 20, |i, j| ((i + 1) * (j + 2)) as f64 % 7.0 - 3.0);
        let w = knn_affinity(&x, 5);
        for i in 0..20 {
            assert_eq!(w[(i, i)], 0.0);
            assert!((w.row(i).sum() - 1.0).abs() < 1e-12);
            assert!(w.row(i).iter().filter(|&&v| v > 0.0).count() <= 5);
        }
    }

    fn arb_case() -> impl Strategy<Value = (DMatrix<f64>, Vec<usize>, usize)> {
        (1usize..7, 0usize..4).prop_flat_map(|(k, extra)| {
            let m = k + extra;
            (
                proptest::collection::vec(-2.0f64..2.0, k * k).prop_map(move |v| DMatrix::from_vec(k, k, v)),
                proptest::sample::subsequence((0..m).collect::<Vec<_>>(), k),
                Just(m),
            )
        })
    }

    proptest! {
        #[test]
        fn laplacian_is_psd_with_zero_row_sums(
            (a, presented, m) in arb_case(),
            xs in proptest::collection::vec(-3.0f64..3.0, 100 * 10),
        ) {
            let ind = build_indicator(&presented, m).unwrap();
            let g = embed_affinity(&a, &ind).unwrap();
            prop_assert_eq!(&g.affinity, &g.affinity.transpose());
            prop_assert!(g.affinity.iter().all(|&v| v >= 0.0));
            let ones = DVector::from_element(m, 1.0);
            prop_assert!((&g.laplacian * ones).norm() < 1e-12);
            for chunk in xs.chunks(10).take(100) {
                let x = DVector::from_iterator(m, chunk.iter().cycle().copied().take(m));
                let q = g.quadratic_form(&x);
                let mut direct = 0.0;
                for i in 0..m {
                    for j in 0..m {
                        direct += 0.5 * g.affinity[(i, j)] * (x[i] - x[j]).powi(2);
                    }
                }
                prop_assert!((q - direct).abs() <= 1e-9 * (1.0 + direct.abs()));
                prop_assert!(q >= -1e-12);
            }
        }

        #[test]
        fn trace_invariant_under_joint_permutation(
            (a, presented, m) in arb_case(),
            seed in any::<u64>(),
            fvals in proptest::collection::vec(-1.0f64..1.0, 20),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let k = presented.len();
            let ind = build_indicator(&presented, m).unwrap();
            let f = DMatrix::from_fn(m, 2, |i, j| fvals[(i * 2 + j) % fvals.len()]);
            let base = embed_affinity(&a, &ind).unwrap().trace_form(&f);
            // Reorder the compacted instances: A' = P A Pᵀ and M' = P M. The
            // lifted graph is unchanged.
            let mut perm: Vec<usize> = (0..k).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let p = DMatrix::from_fn(k, k, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
            let a_perm = &p * &a * p.transpose();
            let m_perm = &p * ind.entries();
            let inner = DMatrix::from_fn(k, k, |i, j| 0.5 * (a_perm[(i, j)].abs() + a_perm[(j, i)].abs()));
            let lifted = m_perm.transpose() * inner * &m_perm;
            let permuted = laplacian_from_affinity(lifted).trace_form(&f);
            prop_assert!((base - permuted).abs() <= 1e-10 * (1.0 + base.abs()));
        }
    }
}
