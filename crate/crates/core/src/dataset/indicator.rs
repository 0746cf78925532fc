use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::{Result, UimcError};

/// Binary `k_v × m` matrix mapping the compacted columns of a view back to
/// their original instance positions.
///
/// Only the sorted list of presented indices is stored; the dense matrix is
/// produced on demand by [`IndicatorMatrix::entries`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IndicatorMatrix {
    presented: Vec<usize>,
    m: usize,
}

/// Builds the indicator for the given presented instance indices.
///
/// Indices must be strictly increasing and lie in `[0, m)`.
pub fn build_indicator(presented: &[usize], m: usize) -> Result<IndicatorMatrix> {
    for (i, &idx) in presented.iter().enumerate() {
        if idx >= m {
            return Err(UimcError::invalid(format!(
                "presented index {idx} out of range for {m} instances"
            )));
        }
        if i > 0 && presented[i - 1] >= idx {
            return Err(UimcError::invalid(format!(
                "presented indices must be strictly increasing (found {} before {idx})",
                presented[i - 1]
            )));
        }
    }
    Ok(IndicatorMatrix {
        presented: presented.to_vec(),
        m,
    })
}

impl IndicatorMatrix {
    /// Indicator of a complete view.
    pub fn identity(m: usize) -> Self {
        Self {
            presented: (0..m).collect(),
            m,
        }
    }

    pub fn presented(&self) -> &[usize] {
        &self.presented
    }

    /// Number of presented instances `k_v`.
    pub fn k(&self) -> usize {
        self.presented.len()
    }

    /// Total number of instances `m`.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn is_complete(&self) -> bool {
        self.presented.len() == self.m
    }

    /// Missing rate `(m - k_v) / m`.
    pub fn missing_rate(&self) -> f64 {
        if self.m == 0 {
            0.0
        } else {
            (self.m - self.k()) as f64 / self.m as f64
        }
    }

    /// Dense `k_v × m` 0/1 matrix.
    pub fn entries(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.k(), self.m);
        for (i, &j) in self.presented.iter().enumerate() {
            out[(i, j)] = 1.0;
        }
        out
    }

    /// `M^T B M` for a `k_v × k_v` matrix `B`, i.e. scatters `B` into an
    /// `m × m` matrix whose rows and columns of missing instances are zero.
    pub fn lift_square(&self, inner: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(inner.shape(), (self.k(), self.k()));
        let mut out = DMatrix::zeros(self.m, self.m);
        for (a, &i) in self.presented.iter().enumerate() {
            for (b, &j) in self.presented.iter().enumerate() {
                out[(i, j)] = inner[(a, b)];
            }
        }
        out
    }

    /// `M F` for an `m × c` matrix `F`: keeps the rows of presented instances.
    pub fn restrict_rows(&self, full: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(full.nrows(), self.m);
        DMatrix::from_fn(self.k(), full.ncols(), |i, j| full[(self.presented[i], j)])
    }

    /// `X M` for a `d × k_v` matrix: scatters columns to their original
    /// positions, leaving missing columns zero.
    pub fn lift_columns(&self, compact: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(compact.ncols(), self.k());
        let mut out = DMatrix::zeros(compact.nrows(), self.m);
        for (a, &j) in self.presented.iter().enumerate() {
            out.set_column(j, &compact.column(a));
        }
        out
    }

    /// Keeps the presented columns of a `d × m` matrix, in original order.
    pub fn select_columns(&self, full: &DMatrix<f64>) -> DMatrix<f64> {
        debug_assert_eq!(full.ncols(), self.m);
        full.select_columns(self.presented.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ones_at_presented_positions() {
        let ind = build_indicator(&[0, 2], 4).unwrap();
        let e = ind.entries();
        assert_eq!(e.shape(), (2, 4));
        let expected = DMatrix::from_row_slice(2, 4, &[1., 0., 0., 0., 0., 0., 1., 0.]);
        assert_eq!(e, expected);
    }

    #[test]
    fn complete_view_is_identity() {
        let ind = build_indicator(&[0, 1, 2], 3).unwrap();
        assert_eq!(ind.entries(), DMatrix::identity(3, 3));
        assert_eq!(ind, IndicatorMatrix::identity(3));
    }

    #[test]
    fn empty_view() {
        let ind = build_indicator(&[], 5).unwrap();
        assert_eq!(ind.entries().shape(), (0, 5));
        assert_eq!(ind.missing_rate(), 1.0);
    }

    #[test]
    fn rejects_bad_indices() {
        assert!(build_indicator(&[1, 1], 3).is_err());
        assert!(build_indicator(&[2, 1], 3).is_err());
        assert!(build_indicator(&[0, 3], 3).is_err());
    }

    #[test]
    fn lifting_matches_dense_products() {
        let ind = build_indicator(&[1, 3, 4], 6).unwrap();
        let m = ind.entries();
        let inner = DMatrix::from_fn(3, 3, |i, j| (i * 3 + j) as f64 - 2.5);
        assert_eq!(ind.lift_square(&inner), m.transpose() * &inner * &m);
        let full = DMatrix::from_fn(6, 2, |i, j| (i as f64) * 0.5 - j as f64);
        assert_eq!(ind.restrict_rows(&full), &m * &full);
        let compact = DMatrix::from_fn(2, 3, |i, j| (i + 2 * j) as f64);
        assert_eq!(ind.lift_columns(&compact), &compact * &m);
        let wide = DMatrix::from_fn(2, 6, |i, j| (i * 6 + j) as f64);
        assert_eq!(ind.select_columns(&wide), &wide * m.transpose());
    }
}
