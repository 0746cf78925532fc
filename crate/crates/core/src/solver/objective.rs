use serde::{Deserialize, Serialize};

use crate::dataset::IncompleteDataset;
use crate::graph::embed_affinity;
use crate::norms::{gamma_norm, l21_norm};
use crate::Result;

use super::state::SolverState;
use super::steps::disagreement;
use super::SolverConfig;

/// The objective split by term, each summed over active views.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveTerms {
    /// `Σ ‖A‖_Γ`.
    pub rank: f64,
    /// `Σ w θ ‖X − XA − E‖_F²`.
    pub fidelity: f64,
    /// `Σ η tr(Fᵀ Mᵀ L_A M F)`.
    pub graph: f64,
    /// `Σ α · disagreement(F, F*)`.
    pub disagreement: f64,
    /// `Σ β ‖E‖_{2,1}`.
    pub error: f64,
}

impl ObjectiveTerms {
    pub fn total(&self) -> f64 {
        self.rank + self.fidelity + self.graph + self.disagreement + self.error
    }
}

/// Evaluates every term of the objective at the current state.
pub fn objective_terms(state: &SolverState, data: &IncompleteDataset, config: &SolverConfig) -> Result<ObjectiveTerms> {
    let mut terms = ObjectiveTerms::default();
    for (v, view) in state.active_views() {
        let x = &data.views()[v];
        let lap = embed_affinity(&view.a, &data.indicators()[v])?;
        terms.rank += gamma_norm(&view.a, config.gamma);
        terms.fidelity += state.weights[v] * state.theta * (x - x * &view.a - &view.e).norm_squared();
        terms.graph += config.eta * lap.trace_form(&view.f);
        terms.disagreement += config.alpha * disagreement(&view.f, &state.f_star, config.k_exp)?;
        terms.error += config.beta * l21_norm(&view.e);
    }
    Ok(terms)
}

pub fn objective(state: &SolverState, data: &IncompleteDataset, config: &SolverConfig) -> Result<f64> {
    objective_terms(state, data, config).map(|t| t.total())
}
