//! The alternating optimiser.
//!
//! Each outer iteration updates, per active view, the indicator `F`, the
//! subspace matrix `A`, the low-rank auxiliary `Q1`, the graph auxiliary
//! `Q2` (with its row-sum multiplier `ϑ`) and the error `E`; then the
//! consensus `F*`, the multipliers `H0, H1, H2`, the view weights and the
//! penalty `θ`. Views with fewer presented instances than clusters are
//! dropped up front and keep weight zero.

mod config;
mod labels;
mod objective;
mod state;
pub mod steps;
pub mod weights;

use std::time::Instant;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use config::{ConsensusInit, Q2Rule, SolverConfig};
pub use labels::extract_labels;
pub use objective::{objective, objective_terms, ObjectiveTerms};
pub use state::{SolverState, ViewState};
pub use steps::disagreement;
pub use weights::{evolve_weight, evolve_weights, initial_weights};

use crate::dataset::{IncompleteDataset, ViewClass};
use crate::graph::{embed_affinity, knn_affinity, laplacian_from_affinity};
use crate::linalg::{normalize_columns, orthonormality_error, smallest_eigenvectors};
use crate::{Result, UimcError};
use steps::ViewSystem;

/// Measurements taken during one outer iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationDiagnostics {
    /// 1-based iteration number.
    pub iter: usize,
    pub terms: ObjectiveTerms,
    /// Largest `‖FᵀF − I‖_F` over the view indicators and the consensus.
    pub orthonormality_error: f64,
    /// Largest relative residual of the subspace normal equations.
    pub subspace_residual: f64,
    /// Per view `‖A − Q1‖_F` after the multiplier step (`None` for dropped views).
    pub gap_q1: Vec<Option<f64>>,
    /// Per view `‖A − Q2‖_F`.
    pub gap_q2: Vec<Option<f64>>,
    /// Per view `‖Q1‖_F`.
    pub q1_norm: Vec<Option<f64>>,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveOutput {
    pub labels: Vec<usize>,
    pub f_star: DMatrix<f64>,
    pub weights: Vec<f64>,
    /// Objective of the initial state followed by one entry per iteration.
    pub objective_trace: Vec<f64>,
    /// Weights of the initial state followed by one entry per iteration.
    pub weight_trace: Vec<Vec<f64>>,
    pub iters_run: usize,
    pub converged: bool,
    pub wall_time_secs: f64,
    pub diagnostics: Vec<IterationDiagnostics>,
}

/// Relative change `|new − old| / |old|`, or `|new − old|` when `old = 0`.
pub fn relative_change(old: f64, new: f64) -> f64 {
    let diff = (new - old).abs();
    if old == 0.0 {
        diff
    } else {
        diff / old.abs()
    }
}

/// Stepwise driver over one dataset. Use [`solve`] unless the individual
/// iterates are of interest.
#[derive(Debug)]
pub struct Solver {
    /// The input, after optional column normalisation.
    data: IncompleteDataset,
    config: SolverConfig,
    classes: Vec<ViewClass>,
    systems: Vec<Option<ViewSystem>>,
    state: SolverState,
    diagnostics: Vec<IterationDiagnostics>,
}

impl Solver {
    /// Builds the initial state: zero iterates, `Q2` seeded with a k-NN
    /// affinity per view, and indicators from that graph.
    pub fn new(data: &IncompleteDataset, config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let data = if config.normalize_columns {
            data.map_views(normalize_columns)?
        } else {
            data.clone()
        };
        let (m, c) = (data.m(), data.c());
        let weights = initial_weights(&data)?;
        let classes = data.classifications().to_vec();
        let mut systems = Vec::with_capacity(data.n_views());
        let mut views = Vec::with_capacity(data.n_views());
        for (v, x) in data.views().iter().enumerate() {
            if classes[v] == ViewClass::Dying {
                log::info!("view {v} has fewer than {c} presented instances and is dropped");
                systems.push(None);
                views.push(None);
                continue;
            }
            let k = x.ncols();
            let q2 = knn_affinity(x, config.knn.min(k.saturating_sub(1)));
            systems.push(Some(ViewSystem::new(x.clone())?));
            views.push(Some(ViewState::initial(x.nrows(), k, m, c, q2)));
        }
        let mut state = SolverState {
            views,
            f_star: DMatrix::zeros(m, c),
            w_init: weights.clone(),
            weights,
            theta: config.theta0,
            iter: 0,
            objective_trace: Vec::new(),
            weight_trace: Vec::new(),
        };
        Self::initial_embeddings(&mut state, &data, &config)?;
        let obj = objective(&state, &data, &config)?;
        state.objective_trace.push(obj);
        state.weight_trace.push(state.weights.clone());
        Ok(Self {
            data,
            config,
            classes,
            systems,
            state,
            diagnostics: Vec::new(),
        })
    }

    fn initial_embeddings(state: &mut SolverState, data: &IncompleteDataset, config: &SolverConfig) -> Result<()> {
        let (m, c) = (data.m(), data.c());
        let init_err = |e: UimcError| e.with_context("initialisation");
        match config.consensus_init {
            ConsensusInit::PerView => {
                for (v, view) in state.views.iter_mut().enumerate() {
                    if let Some(view) = view {
                        let lap = embed_affinity(&view.q2, &data.indicators()[v])?;
                        view.f = steps::update_f(&lap.laplacian, None, c, config).map_err(init_err)?;
                    }
                }
                let fs: Vec<&DMatrix<f64>> = state.active_views().map(|(_, s)| &s.f).collect();
                state.f_star = steps::update_f_star(&fs, c).map_err(init_err)?;
            }
            ConsensusInit::SharedGraph => {
                let mut shared = DMatrix::zeros(m, m);
                let mut laps = Vec::new();
                for (v, view) in state.active_views() {
                    let lap = embed_affinity(&view.q2, &data.indicators()[v])?;
                    shared += &lap.affinity;
                    laps.push((v, lap.laplacian));
                }
                let lap = laplacian_from_affinity(shared).laplacian;
                state.f_star = smallest_eigenvectors(&lap, c).map_err(init_err)?.1;
                for (v, lap) in laps {
                    let view = state.views[v].as_mut().expect("active view");
                    view.f = steps::update_f(&lap, Some(&state.f_star), c, config).map_err(init_err)?;
                }
            }
        }
        Ok(())
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// The dataset the solver works on (normalised if configured).
    pub fn data(&self) -> &IncompleteDataset {
        &self.data
    }

    pub fn diagnostics(&self) -> &[IterationDiagnostics] {
        &self.diagnostics
    }

    /// Runs one outer iteration and returns the new objective value.
    pub fn step(&mut self) -> Result<f64> {
        let started = Instant::now();
        let iter = self.state.iter + 1;
        let iter_err = |e: UimcError| e.with_context(format!("iteration {iter}"));
        let (c, n_active) = (self.data.c(), self.state.n_active());
        let config = &self.config;
        let theta = self.state.theta;
        let mut orth: f64 = 0.0;
        let mut residual: f64 = 0.0;

        for v in 0..self.state.views.len() {
            let (Some(view), Some(sys)) = (self.state.views[v].as_mut(), self.systems[v].as_ref()) else {
                continue;
            };
            let indicator = &self.data.indicators()[v];
            let penalty = self.state.weights[v] * theta;

            let lap = embed_affinity(&view.q2, indicator).map_err(iter_err)?;
            view.f = steps::update_f(&lap.laplacian, Some(&self.state.f_star), c, config).map_err(iter_err)?;
            orth = orth.max(orthonormality_error(&view.f));

            let rhs = steps::subspace_rhs(sys, &view.e, &view.q1, &view.q2, &view.h0, &view.h1, &view.h2, penalty);
            view.a = sys.chol.solve(&rhs);
            residual = residual.max(steps::normal_equation_residual(sys, &view.a, &rhs));

            view.q1 = steps::update_q1(&view.a, &view.h1, penalty, config).map_err(iter_err)?;
            let (q2, vartheta) = steps::update_q2(&view.a, &view.h2, &view.f, indicator, penalty, n_active, config);
            view.q2 = q2;
            view.vartheta = vartheta;
            view.e = steps::update_e(&sys.x, &view.a, &view.h0, &view.e, penalty, config);
        }

        let fs: Vec<&DMatrix<f64>> = self.state.active_views().map(|(_, s)| &s.f).collect();
        self.state.f_star = steps::update_f_star(&fs, c).map_err(iter_err)?;
        orth = orth.max(orthonormality_error(&self.state.f_star));

        let n = self.state.views.len();
        let (mut gap_q1, mut gap_q2, mut q1_norm) = (vec![None; n], vec![None; n], vec![None; n]);
        for v in 0..n {
            let (Some(view), Some(sys)) = (self.state.views[v].as_mut(), self.systems[v].as_ref()) else {
                continue;
            };
            let penalty = self.state.weights[v] * theta;
            let ViewState {
                a,
                e,
                q1,
                q2,
                h0,
                h1,
                h2,
                ..
            } = view;
            steps::update_multipliers(&sys.x, a, e, q1, q2, h0, h1, h2, penalty);
            gap_q1[v] = Some((&*a - &*q1).norm());
            gap_q2[v] = Some((&*a - &*q2).norm());
            q1_norm[v] = Some(q1.norm());
        }

        // evaluated with the weights and penalty that produced these iterates
        let terms = objective_terms(&self.state, &self.data, config).map_err(iter_err)?;
        let value = terms.total();
        if !value.is_finite() {
            return Err(UimcError::numerical(
                format!("iteration {iter}"),
                "objective is not finite",
            ));
        }

        self.state.weights = evolve_weights(&self.state.weights, &self.classes, iter, &self.state.w_init, config);
        self.state.theta = steps::update_penalty(theta, config);
        self.state.iter = iter;
        self.state.objective_trace.push(value);
        self.state.weight_trace.push(self.state.weights.clone());
        self.diagnostics.push(IterationDiagnostics {
            iter,
            terms,
            orthonormality_error: orth,
            subspace_residual: residual,
            gap_q1,
            gap_q2,
            q1_norm,
            seconds: started.elapsed().as_secs_f64(),
        });
        log::debug!(
            "iteration {iter}: objective {value:.6e}, theta {:.3e}",
            self.state.theta
        );
        Ok(value)
    }

    /// Iterates until the relative objective change drops below `rel_tol`
    /// or `max_iters` is reached, then extracts labels.
    pub fn solve(mut self) -> Result<SolveOutput> {
        let started = Instant::now();
        let mut converged = false;
        while self.state.iter < self.config.max_iters {
            let prev = *self.state.objective_trace.last().expect("initial objective");
            let value = self.step()?;
            if relative_change(prev, value) < self.config.rel_tol {
                converged = true;
                break;
            }
        }
        let labels = extract_labels(&self.state.f_star, self.data.c(), self.config.seed)?;
        let SolverState {
            f_star,
            weights,
            objective_trace,
            weight_trace,
            iter,
            ..
        } = self.state;
        Ok(SolveOutput {
            labels,
            f_star,
            weights,
            objective_trace,
            weight_trace,
            iters_run: iter,
            converged,
            wall_time_secs: started.elapsed().as_secs_f64(),
            diagnostics: self.diagnostics,
        })
    }
}

/// Runs the solver to completion on `data`.
pub fn solve(data: &IncompleteDataset, config: &SolverConfig) -> Result<SolveOutput> {
    Solver::new(data, config.clone())?.solve()
}
