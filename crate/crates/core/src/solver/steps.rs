//! The per-variable updates of one outer iteration.
//!
//! `penalty` below is always the view-scaled penalty `w_v·θ`.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dataset::IndicatorMatrix;
use crate::linalg::{largest_eigenvectors, orthonormality_error, smallest_eigenvectors};
use crate::norms::{prox_gamma_norm, reweighting_diag, ProxParams};
use crate::{Result, UimcError};

use super::config::{Q2Rule, SolverConfig};

/// Tolerance for treating a matrix as having orthonormal columns.
pub const ORTHONORMAL_TOL: f64 = 1e-6;

/// Cached per-view quantities that do not change across iterations.
#[derive(Debug, Clone)]
pub struct ViewSystem {
    pub x: DMatrix<f64>,
    pub xtx: DMatrix<f64>,
    /// Factorisation of `XᵀX + 2I`.
    pub chol: Cholesky<f64, Dyn>,
}

impl ViewSystem {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        let k = x.ncols();
        let xtx = x.transpose() * &x;
        let chol = Cholesky::new(&xtx + DMatrix::identity(k, k) * 2.0)
            .ok_or_else(|| UimcError::numerical("XᵀX + 2I factorisation", "matrix not positive definite"))?;
        Ok(Self { x, xtx, chol })
    }
}

/// View indicator update: the `c` eigenvectors of `η·Y − α·F*F*ᵀ` with the
/// smallest eigenvalues, where `Y` is the lifted Laplacian. Without a
/// consensus only the graph term is used.
pub fn update_f(
    lifted_laplacian: &DMatrix<f64>,
    f_star: Option<&DMatrix<f64>>,
    c: usize,
    config: &SolverConfig,
) -> Result<DMatrix<f64>> {
    let mut op = lifted_laplacian * config.eta;
    if let Some(fs) = f_star {
        op -= fs * fs.transpose() * config.alpha;
    }
    smallest_eigenvectors(&op, c)
        .map(|(_, v)| v)
        .map_err(|e| e.with_context("view indicator update"))
}

/// Right-hand side of the subspace normal equations.
pub fn subspace_rhs(
    sys: &ViewSystem,
    e: &DMatrix<f64>,
    q1: &DMatrix<f64>,
    q2: &DMatrix<f64>,
    h0: &DMatrix<f64>,
    h1: &DMatrix<f64>,
    h2: &DMatrix<f64>,
    penalty: f64,
) -> DMatrix<f64> {
    let inner = &sys.x + h0 / penalty - e;
    sys.x.transpose() * inner + q1 + q2 - (h1 + h2) / penalty
}

/// Subspace update: solves `(XᵀX + 2I) A = Xᵀ(X + H0/p − E) + Q1 + Q2 − (H1 + H2)/p`.
pub fn update_a(
    sys: &ViewSystem,
    e: &DMatrix<f64>,
    q1: &DMatrix<f64>,
    q2: &DMatrix<f64>,
    h0: &DMatrix<f64>,
    h1: &DMatrix<f64>,
    h2: &DMatrix<f64>,
    penalty: f64,
) -> DMatrix<f64> {
    sys.chol.solve(&subspace_rhs(sys, e, q1, q2, h0, h1, h2, penalty))
}

/// Relative residual `‖(XᵀX + 2I)A − rhs‖ / ‖rhs‖` of the subspace system.
pub fn normal_equation_residual(sys: &ViewSystem, a: &DMatrix<f64>, rhs: &DMatrix<f64>) -> f64 {
    let lhs = (&sys.xtx + DMatrix::identity(a.nrows(), a.nrows()) * 2.0) * a;
    let scale = rhs.norm();
    if scale == 0.0 {
        lhs.norm()
    } else {
        (lhs - rhs).norm() / scale
    }
}

/// Low-rank auxiliary update: Γ-norm prox of `A + H1/p` with weight `p`.
pub fn update_q1(a: &DMatrix<f64>, h1: &DMatrix<f64>, penalty: f64, config: &SolverConfig) -> Result<DMatrix<f64>> {
    let params = ProxParams {
        gamma: config.gamma,
        omega: penalty,
        max_inner_iters: config.max_inner_iters,
        inner_tol: config.inner_tol,
    };
    prox_gamma_norm(&(a + h1 / penalty), &params).map_err(|e| e.with_context("low-rank auxiliary update"))
}

/// `S_ij = ‖G_i − G_j‖²` for the rows of `G`.
pub fn row_distances(g: &DMatrix<f64>) -> DMatrix<f64> {
    let sq: Vec<f64> = g.row_iter().map(|r| r.norm_squared()).collect();
    let gram = g * g.transpose();
    DMatrix::from_fn(g.nrows(), g.nrows(), |i, j| {
        (sq[i] + sq[j] - 2.0 * gram[(i, j)]).max(0.0)
    })
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    if v.is_empty() {
        return Vec::new();
    }
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (i, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if u - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

/// Graph auxiliary update from `R = A + H2/p` shifted by
/// `η/(2p)·S`, with `S` the squared distances between the restricted
/// indicator rows `G = M F`. The diagonal is zeroed afterwards.
///
/// Also returns the row-sum multiplier
/// `ϑ_i = p (Σ_j (Q2_ij − H2_ij/p) − 1) / (1 − n_v)`, which no other update
/// reads; it is zero when only one view is active.
pub fn update_q2(
    a: &DMatrix<f64>,
    h2: &DMatrix<f64>,
    f: &DMatrix<f64>,
    indicator: &IndicatorMatrix,
    penalty: f64,
    active_views: usize,
    config: &SolverConfig,
) -> (DMatrix<f64>, DVector<f64>) {
    let g = indicator.restrict_rows(f);
    let shift = config.eta / (2.0 * penalty);
    let s = row_distances(&g) * shift;
    let r = a + h2 / penalty;
    let k = r.nrows();
    let mut q2 = DMatrix::from_fn(k, k, |i, j| {
        let (rv, sv) = (r[(i, j)], s[(i, j)]);
        match config.q2_rule {
            Q2Rule::Literal => {
                if rv >= sv {
                    rv - sv
                } else {
                    rv + sv
                }
            }
            Q2Rule::SoftThreshold => rv.signum() * (rv.abs() - sv).max(0.0),
        }
    });
    q2.fill_diagonal(0.0);
    if config.q2_row_simplex && k > 1 {
        for i in 0..k {
            let off: Vec<f64> = (0..k).filter(|&j| j != i).map(|j| q2[(i, j)]).collect();
            let proj = project_simplex(&off);
            for (j, val) in (0..k).filter(|&j| j != i).zip(proj) {
                q2[(i, j)] = val;
            }
        }
    }
    let vartheta = if active_views > 1 {
        let denom = 1.0 - active_views as f64;
        DVector::from_fn(k, |i, _| {
            let row: f64 = (0..k).map(|j| q2[(i, j)] - h2[(i, j)] / penalty).sum();
            penalty * (row - 1.0) / denom
        })
    } else {
        DVector::zeros(k)
    };
    (q2, vartheta)
}

/// Error update `E = (β/p·D + I)⁻¹ K` with `K = X − XA + H0/p` and `D` the
/// L2,1 reweighting of the previous error.
pub fn update_e(
    x: &DMatrix<f64>,
    a: &DMatrix<f64>,
    h0: &DMatrix<f64>,
    e_prev: &DMatrix<f64>,
    penalty: f64,
    config: &SolverConfig,
) -> DMatrix<f64> {
    let mut k = x - x * a + h0 / penalty;
    let d = reweighting_diag(e_prev, config.reweight_eps);
    let ratio = config.beta / penalty;
    for (i, mut row) in k.row_iter_mut().enumerate() {
        row /= ratio * d[i] + 1.0;
    }
    k
}

/// Consensus update: the `c` eigenvectors of `Σ_v F_v F_vᵀ` with the largest
/// eigenvalues, summing in the given view order.
pub fn update_f_star(view_fs: &[&DMatrix<f64>], c: usize) -> Result<DMatrix<f64>> {
    let m = view_fs
        .first()
        .map(|f| f.nrows())
        .ok_or_else(|| UimcError::invalid("consensus update needs at least one view"))?;
    let mut sum = DMatrix::zeros(m, m);
    for f in view_fs {
        sum += *f * f.transpose();
    }
    largest_eigenvectors(&sum, c)
        .map(|(_, v)| v)
        .map_err(|e| e.with_context("consensus update"))
}

/// Multiplier ascent:
/// `H0 += p(X − XA − E)`, `H1 += p(A − Q1)`, `H2 += p(A − Q2)`.
#[allow(clippy::too_many_arguments)]
pub fn update_multipliers(
    x: &DMatrix<f64>,
    a: &DMatrix<f64>,
    e: &DMatrix<f64>,
    q1: &DMatrix<f64>,
    q2: &DMatrix<f64>,
    h0: &mut DMatrix<f64>,
    h1: &mut DMatrix<f64>,
    h2: &mut DMatrix<f64>,
    penalty: f64,
) {
    *h0 += (x - x * a - e) * penalty;
    *h1 += (a - q1) * penalty;
    *h2 += (a - q2) * penalty;
}

/// `θ ← min(φθ, θ_max)`.
pub fn update_penalty(theta: f64, config: &SolverConfig) -> f64 {
    (config.phi * theta).min(config.theta_max)
}

/// Disagreement between two indicator matrices,
/// `‖F_v F_vᵀ / ‖F_v F_vᵀ‖_F^k − F* F*ᵀ / ‖F* F*ᵀ‖_F^k‖_F²`.
///
/// For orthonormal columns `‖F Fᵀ‖_F = √c` and the value reduces to
/// `2 (c − ‖F_vᵀ F*‖_F²) / c^k`.
pub fn disagreement(f_v: &DMatrix<f64>, f_star: &DMatrix<f64>, k_exp: u32) -> Result<f64> {
    if f_v.shape() != f_star.shape() {
        return Err(UimcError::shape(format!(
            "indicator shapes differ: {:?} vs {:?}",
            f_v.shape(),
            f_star.shape()
        )));
    }
    for (name, f) in [("view indicator", f_v), ("consensus", f_star)] {
        let err = orthonormality_error(f);
        if err > ORTHONORMAL_TOL {
            return Err(UimcError::invalid(format!(
                "{name} columns are not orthonormal (‖FᵀF − I‖ = {err:e})"
            )));
        }
    }
    let c = f_v.ncols() as f64;
    let overlap = (f_v.transpose() * f_star).norm_squared();
    Ok((2.0 * (c - overlap) / c.powi(k_exp as i32)).max(0.0))
}
