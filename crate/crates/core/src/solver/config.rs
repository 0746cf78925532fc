use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::norms::DEFAULT_REWEIGHT_EPS;
use crate::{Result, UimcError};

/// Update rule for the graph auxiliary variable `Q2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Q2Rule {
    /// `R − sS` where `R ≥ sS`, otherwise `R + sS`.
    Literal,
    /// `sign(R)·max(|R| − sS, 0)`.
    SoftThreshold,
}

/// How the consensus embedding is formed before the first iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsensusInit {
    /// Per-view embeddings of the initial graphs (without the consensus
    /// term), then the usual consensus update.
    PerView,
    /// Spectral embedding of the sum of all lifted initial graphs.
    SharedGraph,
}

/// Hyperparameters of the solver. Every field has a default, so partial
/// config files are accepted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Weight of the view/consensus disagreement.
    pub alpha: f64,
    /// Weight of the L2,1 error penalty.
    pub beta: f64,
    /// Weight of the graph (spectral) term.
    pub eta: f64,
    /// Γ-norm shape parameter.
    pub gamma: f64,
    /// Exponent of the disagreement normalisation.
    pub k_exp: u32,
    pub mu_strong: f64,
    pub mu_weak: f64,
    pub mu_neutral: f64,
    pub theta0: f64,
    pub phi: f64,
    pub theta_max: f64,
    pub max_iters: usize,
    /// Stop once the relative change of the objective drops below this.
    pub rel_tol: f64,
    pub seed: u64,
    pub max_inner_iters: usize,
    pub inner_tol: f64,
    pub reweight_eps: f64,
    /// Neighbours in the initial k-NN graph.
    pub knn: usize,
    pub q2_rule: Q2Rule,
    /// Project each row of `Q2` onto the probability simplex after the update.
    pub q2_row_simplex: bool,
    pub consensus_init: ConsensusInit,
    /// Scale every instance to unit norm within each view before solving.
    pub normalize_columns: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 1e-2,
            beta: 1e5,
            eta: 1e-1,
            gamma: 1e-3,
            k_exp: 1,
            mu_strong: 1.1,
            mu_weak: 0.9,
            mu_neutral: 1.0,
            theta0: 1e-3,
            phi: 1.1,
            theta_max: 1e7,
            max_iters: 100,
            rel_tol: 1e-4,
            seed: 0,
            max_inner_iters: 50,
            inner_tol: 1e-8,
            reweight_eps: DEFAULT_REWEIGHT_EPS,
            knn: 15,
            q2_rule: Q2Rule::SoftThreshold,
            q2_row_simplex: false,
            consensus_init: ConsensusInit::SharedGraph,
            normalize_columns: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let nonneg = [("alpha", self.alpha), ("beta", self.beta), ("eta", self.eta)];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(UimcError::invalid(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.gamma > 0.0) {
            return Err(UimcError::invalid("gamma must be > 0"));
        }
        if self.k_exp < 1 {
            return Err(UimcError::invalid("k_exp must be >= 1"));
        }
        if !(0.0 < self.mu_weak && self.mu_weak < self.mu_neutral && self.mu_neutral < self.mu_strong) {
            return Err(UimcError::invalid(format!(
                "need 0 < mu_weak < mu_neutral < mu_strong, got {} / {} / {}",
                self.mu_weak, self.mu_neutral, self.mu_strong
            )));
        }
        if !(self.theta0 > 0.0 && self.theta0 <= self.theta_max) {
            return Err(UimcError::invalid("need 0 < theta0 <= theta_max"));
        }
        if !(self.phi > 1.0) {
            return Err(UimcError::invalid("phi must be > 1"));
        }
        if self.max_inner_iters == 0 {
            return Err(UimcError::invalid("max_inner_iters must be >= 1"));
        }
        if !(self.reweight_eps > 0.0) {
            return Err(UimcError::invalid("reweight_eps must be > 0"));
        }
        if !(self.rel_tol >= 0.0) {
            return Err(UimcError::invalid("rel_tol must be >= 0"));
        }
        Ok(())
    }

    /// Reads a JSON or TOML config (chosen by extension; anything other than
    /// `.toml` is parsed as JSON). Missing keys take their defaults.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| UimcError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let malformed = |detail: String| UimcError::Malformed {
            what: "solver config",
            path: path.to_path_buf(),
            detail,
        };
        let config: Self = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| malformed(e.to_string()))?
        } else {
            serde_json::from_str(&text).map_err(|e| malformed(e.to_string()))?
        };
        config.validate().map_err(|e| malformed(e.to_string()))?;
        Ok(config)
    }
}
