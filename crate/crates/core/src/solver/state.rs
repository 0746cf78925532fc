use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Iterates of one view. Shapes: `A, Q1, Q2, H1, H2` are `k_v × k_v`,
/// `E, H0` are `d_v × k_v`, `F` is `m × c`, `ϑ` has length `k_v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewState {
    pub a: DMatrix<f64>,
    pub e: DMatrix<f64>,
    pub q1: DMatrix<f64>,
    pub q2: DMatrix<f64>,
    pub f: DMatrix<f64>,
    pub h0: DMatrix<f64>,
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
    pub vartheta: DVector<f64>,
}

impl ViewState {
    /// Zero iterates except `Q2`, with an empty indicator `F`.
    pub fn initial(d: usize, k: usize, m: usize, c: usize, q2: DMatrix<f64>) -> Self {
        Self {
            a: DMatrix::zeros(k, k),
            e: DMatrix::zeros(d, k),
            q1: DMatrix::zeros(k, k),
            q2,
            f: DMatrix::zeros(m, c),
            h0: DMatrix::zeros(d, k),
            h1: DMatrix::zeros(k, k),
            h2: DMatrix::zeros(k, k),
            vartheta: DVector::zeros(k),
        }
    }
}

/// All iterates of the solver. Dying views carry no state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverState {
    pub views: Vec<Option<ViewState>>,
    pub f_star: DMatrix<f64>,
    pub weights: Vec<f64>,
    /// Initial weights, anchoring the evolution bounds.
    pub w_init: Vec<f64>,
    pub theta: f64,
    /// Completed outer iterations.
    pub iter: usize,
    /// Objective before the first iteration and after each one.
    pub objective_trace: Vec<f64>,
    /// Weights before the first iteration and after each one.
    pub weight_trace: Vec<Vec<f64>>,
}

impl SolverState {
    pub fn active_views(&self) -> impl Iterator<Item = (usize, &ViewState)> {
        self.views
            .iter()
            .enumerate()
            .filter_map(|(v, s)| s.as_ref().map(|s| (v, s)))
    }

    pub fn n_active(&self) -> usize {
        self.views.iter().filter(|s| s.is_some()).count()
    }
}
