//! Complete and incomplete multi-view datasets.
//!
//! Views are stored feature-major: view `v` is a `d_v × m` matrix with one
//! column per instance. An incomplete view keeps only its presented columns
//! (in original order) together with an [`IndicatorMatrix`] recording where
//! they came from.

mod indicator;
pub mod io;
mod mask;
pub mod synthetic;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use indicator::{build_indicator, IndicatorMatrix};
pub use mask::{apply_mask, apply_presented, rates_from_multipliers, MaskSpec};

use crate::{Result, UimcError};

/// Ground-truth multi-view data with every instance present in every view.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    views: Vec<DMatrix<f64>>,
    labels: Option<Vec<usize>>,
    m: usize,
    c: usize,
}

impl MultiViewDataset {
    pub fn new(views: Vec<DMatrix<f64>>, labels: Option<Vec<usize>>, c: usize) -> Result<Self> {
        let m = views
            .first()
            .map(|v| v.ncols())
            .ok_or_else(|| UimcError::invalid("a dataset needs at least one view"))?;
        for (v, view) in views.iter().enumerate() {
            if view.ncols() != m {
                return Err(UimcError::shape(format!(
                    "view {v} has {} instances, expected {m}",
                    view.ncols()
                )));
            }
            if view.nrows() == 0 {
                return Err(UimcError::shape(format!("view {v} has no features")));
            }
        }
        validate_labels(labels.as_deref(), m, c)?;
        Ok(Self { views, labels, m, c })
    }

    pub fn views(&self) -> &[DMatrix<f64>] {
        &self.views
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    /// Treats every view as fully presented.
    pub fn to_incomplete(&self) -> IncompleteDataset {
        let indicators = vec![IndicatorMatrix::identity(self.m); self.views.len()];
        IncompleteDataset::new(self.views.clone(), indicators, self.c, self.labels.clone())
            .expect("a valid complete dataset is a valid incomplete dataset")
    }
}

pub(crate) fn validate_labels(labels: Option<&[usize]>, m: usize, c: usize) -> Result<()> {
    if c < 2 {
        return Err(UimcError::invalid(format!("cluster count must be >= 2, got {c}")));
    }
    if let Some(labels) = labels {
        if labels.len() != m {
            return Err(UimcError::shape(format!("{} labels for {m} instances", labels.len())));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= c) {
            return Err(UimcError::invalid(format!("label {bad} outside 0..{c}")));
        }
    }
    Ok(())
}

/// Re-encodes arbitrary integer labels as dense ids `0..k`, ordered by the
/// original label value.
pub fn densify_labels(raw: &[i64]) -> Vec<usize> {
    let mut distinct: Vec<i64> = raw.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    raw.iter()
        .map(|l| distinct.binary_search(l).expect("label present"))
        .collect()
}

/// Role of a view given its missing rate relative to the other views.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ViewClass {
    /// Missing rate below the average.
    Strong,
    /// Missing rate above the average.
    Weak,
    /// Missing rate exactly at the average.
    Neutral,
    /// Fewer presented instances than clusters; excluded from clustering.
    Dying,
}

/// Per-view compacted data plus indicator matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct IncompleteDataset {
    views: Vec<DMatrix<f64>>,
    indicators: Vec<IndicatorMatrix>,
    classifications: Vec<ViewClass>,
    labels: Option<Vec<usize>>,
    m: usize,
    c: usize,
}

impl IncompleteDataset {
    pub fn new(
        views: Vec<DMatrix<f64>>,
        indicators: Vec<IndicatorMatrix>,
        c: usize,
        labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        if views.is_empty() {
            return Err(UimcError::invalid("a dataset needs at least one view"));
        }
        if views.len() != indicators.len() {
            return Err(UimcError::shape(format!(
                "{} views but {} indicators",
                views.len(),
                indicators.len()
            )));
        }
        let m = indicators[0].m();
        for (v, (view, ind)) in views.iter().zip(&indicators).enumerate() {
            if ind.m() != m {
                return Err(UimcError::shape(format!(
                    "indicator {v} spans {} instances, expected {m}",
                    ind.m()
                )));
            }
            if view.ncols() != ind.k() {
                return Err(UimcError::shape(format!(
                    "view {v} has {} columns but {} presented instances",
                    view.ncols(),
                    ind.k()
                )));
            }
            if view.nrows() == 0 {
                return Err(UimcError::shape(format!("view {v} has no features")));
            }
        }
        validate_labels(labels.as_deref(), m, c)?;
        let counts: Vec<usize> = indicators.iter().map(IndicatorMatrix::k).collect();
        let classifications = classify_counts(&counts, c);
        let dataset = Self {
            views,
            indicators,
            classifications,
            labels,
            m,
            c,
        };
        let uncovered = dataset.uncovered_instances();
        if !uncovered.is_empty() {
            log::warn!(
                "{} instance(s) are missing from every view (first: {})",
                uncovered.len(),
                uncovered[0]
            );
        }
        Ok(dataset)
    }

    pub fn views(&self) -> &[DMatrix<f64>] {
        &self.views
    }

    /// Same dataset with every view replaced by `f(view)`; `f` must keep the
    /// number of columns.
    pub fn map_views(&self, mut f: impl FnMut(&DMatrix<f64>) -> DMatrix<f64>) -> Result<Self> {
        let views = self.views.iter().map(&mut f).collect();
        Self::new(views, self.indicators.clone(), self.c, self.labels.clone())
    }

    pub fn indicators(&self) -> &[IndicatorMatrix] {
        &self.indicators
    }

    pub fn classifications(&self) -> &[ViewClass] {
        &self.classifications
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn n_views(&self) -> usize {
        self.views.len()
    }

    /// Presented-instance count `k_v` per view.
    pub fn presented_counts(&self) -> Vec<usize> {
        self.indicators.iter().map(IndicatorMatrix::k).collect()
    }

    /// Realised missing rate per view.
    pub fn missing_rates(&self) -> Vec<f64> {
        self.indicators.iter().map(IndicatorMatrix::missing_rate).collect()
    }

    /// Instances absent from every view.
    pub fn uncovered_instances(&self) -> Vec<usize> {
        let mut covered = vec![false; self.m];
        for ind in &self.indicators {
            for &j in ind.presented() {
                covered[j] = true;
            }
        }
        covered
            .iter()
            .enumerate()
            .filter_map(|(j, &c)| (!c).then_some(j))
            .collect()
    }
}

/// Classifies every view as strong, weak, neutral or dying.
pub fn classify_views(incomplete: &IncompleteDataset) -> Vec<ViewClass> {
    classify_counts(&incomplete.presented_counts(), incomplete.c())
}

/// Classification from presented counts.
///
/// Comparing `r_v` against the mean rate is the same as comparing `k_v`
/// against the mean count, which is done in exact integer arithmetic:
/// `r_v < mean(r)` iff `n_v * k_v > sum(k)`.
pub fn classify_counts(presented: &[usize], c: usize) -> Vec<ViewClass> {
    let n = presented.len() as u128;
    let total: u128 = presented.iter().map(|&k| k as u128).sum();
    presented
        .iter()
        .map(|&k| {
            if k < c {
                ViewClass::Dying
            } else {
                match (n * k as u128).cmp(&total) {
                    std::cmp::Ordering::Greater => ViewClass::Strong,
                    std::cmp::Ordering::Less => ViewClass::Weak,
                    std::cmp::Ordering::Equal => ViewClass::Neutral,
                }
            }
        })
        .collect()
}

/// Fills every missing column with the mean of the presented columns of the
/// same view.
pub fn mean_fill(incomplete: &IncompleteDataset) -> Result<MultiViewDataset> {
    let m = incomplete.m();
    let mut views = Vec::with_capacity(incomplete.n_views());
    for (v, (x, ind)) in incomplete.views().iter().zip(incomplete.indicators()).enumerate() {
        if ind.k() == 0 {
            return Err(UimcError::UnsupportedInput(format!(
                "view {v} has no presented instances to average"
            )));
        }
        let mean = x.column_mean();
        let mut full = DMatrix::from_fn(x.nrows(), m, |i, _| mean[i]);
        for (a, &j) in ind.presented().iter().enumerate() {
            full.set_column(j, &x.column(a));
        }
        views.push(full);
    }
    MultiViewDataset::new(views, incomplete.labels().map(<[usize]>::to_vec), incomplete.c())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_counts(counts: &[usize], m: usize, c: usize) -> IncompleteDataset {
        let views = counts.iter().map(|&k| DMatrix::zeros(1, k)).collect();
        let inds = counts
            .iter()
            .map(|&k| build_indicator(&(0..k).collect::<Vec<_>>(), m).unwrap())
            .collect();
        IncompleteDataset::new(views, inds, c, None).unwrap()
    }

    #[test]
    fn strong_and_weak() {
        // rates 0.2 and 0.8
        let d = with_counts(&[80, 20], 100, 2);
        assert_eq!(classify_views(&d), vec![ViewClass::Strong, ViewClass::Weak]);
    }

    #[test]
    fn dying_overrides_rate_class() {
        let d = with_counts(&[100, 3], 100, 5);
        assert_eq!(classify_views(&d), vec![ViewClass::Strong, ViewClass::Dying]);
    }

    #[test]
    fn equal_rates_are_neutral() {
        let d = with_counts(&[50, 50], 100, 2);
        assert_eq!(classify_views(&d), vec![ViewClass::Neutral, ViewClass::Neutral]);
        assert_eq!(d.classifications(), classify_views(&d).as_slice());
    }

    #[test]
    fn three_way_classification() {
        let d = with_counts(&[90, 60, 30], 100, 3);
        assert_eq!(
            classify_views(&d),
            vec![ViewClass::Strong, ViewClass::Neutral, ViewClass::Weak]
        );
    }

    #[test]
    fn mean_fill_hand_case() {
        // one feature, instances 1 and 3 presented with values 1 and 3
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 3.0]);
        let ind = build_indicator(&[1, 3], 4).unwrap();
        let d = IncompleteDataset::new(vec![x], vec![ind], 2, None).unwrap();
        let full = mean_fill(&d).unwrap();
        assert_eq!(full.views()[0].as_slice(), &[2.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn mean_fill_two_presented_of_three() {
        // m = 3, presented [1, 2] holding values 1 and 3: column 0 gets 2
        let x = DMatrix::from_row_slice(1, 2, &[1.0, 3.0]);
        let ind = build_indicator(&[1, 2], 3).unwrap();
        let d = IncompleteDataset::new(vec![x], vec![ind], 2, None).unwrap();
        assert_eq!(mean_fill(&d).unwrap().views()[0].as_slice(), &[2.0, 1.0, 3.0]);
    }

    #[test]
    fn mean_fill_complete_is_identity() {
        let x = DMatrix::from_fn(3, 5, |i, j| (i * 7 + j * 3) as f64);
        let full = MultiViewDataset::new(vec![x.clone()], None, 2).unwrap();
        assert_eq!(mean_fill(&full.to_incomplete()).unwrap(), full);
    }

    #[test]
    fn mean_fill_singleton() {
        let x = DMatrix::from_row_slice(2, 1, &[4.0, -1.0]);
        let ind = build_indicator(&[2], 4).unwrap();
        let d = IncompleteDataset::new(vec![x.clone()], vec![ind], 2, None).unwrap();
        let full = mean_fill(&d).unwrap();
        for j in 0..4 {
            assert_eq!(full.views()[0].column(j), x.column(0));
        }
    }

    #[test]
    fn mean_fill_rejects_empty_view() {
        let d = IncompleteDataset::new(
            vec![DMatrix::zeros(2, 0)],
            vec![build_indicator(&[], 4).unwrap()],
            2,
            None,
        )
        .unwrap();
        assert!(matches!(mean_fill(&d), Err(UimcError::UnsupportedInput(_))));
    }

    #[test]
    fn rejects_ragged_views() {
        let err = MultiViewDataset::new(vec![DMatrix::zeros(2, 3), DMatrix::zeros(2, 4)], None, 2);
        assert!(matches!(err, Err(UimcError::ShapeMismatch(_))));
    }

    #[test]
    fn densify_reencodes() {
        assert_eq!(densify_labels(&[3, 1, 3, 7]), vec![1, 0, 1, 2]);
    }

    #[test]
    fn uncovered_instances_reported() {
        let d = IncompleteDataset::new(
            vec![DMatrix::zeros(1, 2), DMatrix::zeros(1, 1)],
            vec![build_indicator(&[0, 1], 4).unwrap(), build_indicator(&[3], 4).unwrap()],
            2,
            None,
        )
        .unwrap();
        assert_eq!(d.uncovered_instances(), vec![2]);
    }
}
