//! Γ-norm and L2,1-norm, and the Γ-norm proximal operator.
//!
//! The Γ-norm of a matrix is `Σ σ_i / (σ_i + γ)` over its singular values; it
//! approaches the rank as `γ → 0`. Its proximal operator acts on singular
//! values independently, and each scalar subproblem
//! `min_s s/(s+γ) + ω/2 (s − σ_T)²` is solved by a difference-of-convex
//! iteration that linearises the concave penalty at the current point.

use nalgebra::{DMatrix, DVector, SVD};
use serde::{Deserialize, Serialize};

use crate::{Result, UimcError};

/// Singular values below this are treated as zero when taking gradients.
pub const ZERO_SINGULAR_VALUE: f64 = 1e-12;

/// Row-norm guard for the L2,1 reweighting.
pub const DEFAULT_REWEIGHT_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxParams {
    pub gamma: f64,
    /// Weight of the quadratic term.
    pub omega: f64,
    pub max_inner_iters: usize,
    pub inner_tol: f64,
}

impl ProxParams {
    pub fn new(gamma: f64, omega: f64) -> Result<Self> {
        let p = Self {
            gamma,
            omega,
            max_inner_iters: 50,
            inner_tol: 1e-8,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(UimcError::invalid(format!("gamma must be > 0, got {}", self.gamma)));
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(UimcError::invalid(format!("omega must be > 0, got {}", self.omega)));
        }
        if self.max_inner_iters == 0 {
            return Err(UimcError::invalid("max_inner_iters must be >= 1"));
        }
        if !(self.inner_tol >= 0.0) {
            return Err(UimcError::invalid("inner_tol must be nonnegative"));
        }
        Ok(())
    }
}

pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    if a.is_empty() {
        return DVector::zeros(0);
    }
    SVD::new(a.clone(), false, false).singular_values
}

/// `Σ σ_i / (σ_i + γ)`.
pub fn gamma_norm(a: &DMatrix<f64>, gamma: f64) -> f64 {
    gamma_penalty(singular_values(a).iter().copied(), gamma)
}

fn gamma_penalty(sigma: impl Iterator<Item = f64>, gamma: f64) -> f64 {
    sigma.map(|s| s / (s + gamma)).sum()
}

/// Sum of the Euclidean norms of the rows.
pub fn l21_norm(e: &DMatrix<f64>) -> f64 {
    e.row_iter().map(|r| r.norm()).sum()
}

/// Derivative of `s ↦ s / (s + γ)`, with `s` below [`ZERO_SINGULAR_VALUE`]
/// evaluated at zero.
pub fn gamma_gradient(s: f64, gamma: f64) -> f64 {
    if s < ZERO_SINGULAR_VALUE {
        1.0 / gamma
    } else {
        gamma / (gamma + s).powi(2)
    }
}

/// Scalar prox objective `s/(s+γ) + ω/2 (s − σ_T)²`.
pub fn prox_objective(s: f64, sigma_t: f64, gamma: f64, omega: f64) -> f64 {
    s / (s + gamma) + 0.5 * omega * (s - sigma_t).powi(2)
}

/// Difference-of-convex iteration `s ← (σ_T − ∇h(s)/ω)_+` started at `σ_T`.
///
/// The iterates decrease monotonically to the largest stationary point below
/// `σ_T` (or to zero). The concave penalty admits at most one such interior
/// minimiser, the other candidate being the boundary `s = 0`; the better of
/// the two is returned.
pub fn prox_scalar(sigma_t: f64, params: &ProxParams) -> f64 {
    let ProxParams {
        gamma,
        omega,
        max_inner_iters,
        inner_tol,
    } = *params;
    if sigma_t <= 0.0 {
        return 0.0;
    }
    let mut s = sigma_t;
    for _ in 0..max_inner_iters {
        let next = (sigma_t - gamma_gradient(s, gamma) / omega).max(0.0);
        let step = (next - s).abs();
        s = next;
        if step <= inner_tol || s == 0.0 {
            break;
        }
    }
    if prox_objective(0.0, sigma_t, gamma, omega) < prox_objective(s, sigma_t, gamma, omega) {
        0.0
    } else {
        s
    }
}

/// Proximal operator of `‖·‖_Γ` with weight `ω`: shrinks the singular values
/// of `t` with [`prox_scalar`] and keeps its singular vectors.
pub fn prox_gamma_norm(t: &DMatrix<f64>, params: &ProxParams) -> Result<DMatrix<f64>> {
    params.validate()?;
    if t.is_empty() {
        return Ok(t.clone());
    }
    if t.iter().any(|v| !v.is_finite()) {
        return Err(UimcError::numerical("Γ-norm prox", "non-finite input"));
    }
    let svd = SVD::try_new(t.clone(), true, true, f64::EPSILON, 0)
        .ok_or_else(|| UimcError::numerical("Γ-norm prox", "SVD did not converge"))?;
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let shrunk = svd.singular_values.map(|s| prox_scalar(s, params));
    Ok(u * DMatrix::from_diagonal(&shrunk) * v_t)
}

/// `‖Q‖_Γ + ω/2 ‖Q − T‖_F²`.
pub fn prox_matrix_objective(q: &DMatrix<f64>, t: &DMatrix<f64>, params: &ProxParams) -> f64 {
    gamma_norm(q, params.gamma) + 0.5 * params.omega * (q - t).norm_squared()
}

/// Diagonal of the L2,1 reweighting matrix, `1 / (‖row_i(E)‖ + ε)`.
pub fn reweighting_diag(e_prev: &DMatrix<f64>, eps: f64) -> DVector<f64> {
    DVector::from_iterator(e_prev.nrows(), e_prev.row_iter().map(|r| 1.0 / (r.norm() + eps)))
}
