//! Baseline clusterers: best single view (BSV) and feature concatenation,
//! both on mean-filled views, plus the shared k-means primitive.

mod kmeans;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use kmeans::{kmeans, kmeans_with_restarts, KMeansResult, DEFAULT_RESTARTS};

use crate::dataset::{mean_fill, IncompleteDataset};
use crate::metrics::{accuracy, LabelPair};
use crate::{Result, UimcError};

/// How BSV picked its reported view.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViewSelection {
    /// Highest accuracy against the ground truth.
    Truth,
    /// Lowest within-cluster / total sum of squares; used without labels.
    Objective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    pub labels: Vec<usize>,
    /// BSV only: labels of every usable view (`None` for views with no
    /// presented instance).
    pub per_view_labels: Option<Vec<Option<Vec<usize>>>>,
    pub chosen_view: Option<usize>,
    pub selection: Option<ViewSelection>,
}

/// Drops views with no presented instance and mean-fills the rest; returns
/// the original index of each kept view alongside its `m × d_v` point matrix.
fn filled_points(incomplete: &IncompleteDataset) -> Result<Vec<(usize, DMatrix<f64>)>> {
    let keep: Vec<usize> = (0..incomplete.n_views())
        .filter(|&v| incomplete.indicators()[v].k() > 0)
        .collect();
    if keep.is_empty() {
        return Err(UimcError::UnsupportedInput(
            "every view is empty; nothing to cluster".into(),
        ));
    }
    if keep.len() < incomplete.n_views() {
        log::warn!(
            "skipping {} view(s) without presented instances",
            incomplete.n_views() - keep.len()
        );
    }
    let subset = IncompleteDataset::new(
        keep.iter().map(|&v| incomplete.views()[v].clone()).collect(),
        keep.iter().map(|&v| incomplete.indicators()[v].clone()).collect(),
        incomplete.c(),
        incomplete.labels().map(<[usize]>::to_vec),
    )?;
    let filled = mean_fill(&subset)?;
    Ok(keep
        .into_iter()
        .zip(filled.views())
        .map(|(v, x)| (v, x.transpose()))
        .collect())
}

fn total_sum_of_squares(points: &DMatrix<f64>) -> f64 {
    let mean = points.row_mean();
    points.row_iter().map(|r| (r - &mean).norm_squared()).sum()
}

/// Best single view: k-means on each mean-filled view, reporting the view
/// with the highest accuracy against `truth` (lowest index on ties). Without
/// truth the view with the lowest normalised k-means objective is reported.
pub fn bsv(incomplete: &IncompleteDataset, c: usize, seed: u64, truth: Option<&[usize]>) -> Result<BaselineResult> {
    let views = filled_points(incomplete)?;
    let mut per_view: Vec<Option<Vec<usize>>> = vec![None; incomplete.n_views()];
    let mut best: Option<(usize, f64)> = None;
    for (v, points) in &views {
        let run = kmeans(points, c, seed)?;
        let score = match truth {
            Some(t) => accuracy(LabelPair::new(&run.labels, t)?),
            None => {
                let tss = total_sum_of_squares(points);
                if tss > 0.0 {
                    -run.inertia / tss
                } else {
                    0.0
                }
            }
        };
        if best.is_none_or(|(_, s)| score > s) {
            best = Some((*v, score));
        }
        per_view[*v] = Some(run.labels);
    }
    let (chosen, _) = best.expect("at least one view");
    Ok(BaselineResult {
        labels: per_view[chosen].clone().expect("chosen view was clustered"),
        per_view_labels: Some(per_view),
        chosen_view: Some(chosen),
        selection: Some(if truth.is_some() {
            ViewSelection::Truth
        } else {
            ViewSelection::Objective
        }),
    })
}

/// Concatenates the mean-filled views feature-wise and runs k-means once.
pub fn concat(incomplete: &IncompleteDataset, c: usize, seed: u64) -> Result<BaselineResult> {
    let views = filled_points(incomplete)?;
    let m = incomplete.m();
    let total_d: usize = views.iter().map(|(_, p)| p.ncols()).sum();
    let mut stacked = DMatrix::zeros(m, total_d);
    let mut offset = 0;
    for (_, p) in &views {
        stacked.columns_mut(offset, p.ncols()).copy_from(p);
        offset += p.ncols();
    }
    Ok(BaselineResult {
        labels: kmeans(&stacked, c, seed)?.labels,
        per_view_labels: None,
        chosen_view: None,
        selection: None,
    })
}
