//! Unbalanced incomplete multi-view clustering.
//!
//! Views may miss different numbers of instances. Each view learns a
//! self-representation matrix over its presented instances, regularised by a
//! nonconvex rank surrogate (the Γ-norm) and a row-sparse error term. The
//! per-view graphs are lifted back to the full instance set, per-view spectral
//! embeddings are pulled towards a consensus embedding, and view weights evolve
//! each iteration so that views with more presented instances gain influence.
//!
//! The crate is organised as:
//!
//! - [`dataset`]: complete and incomplete multi-view data, indicator matrices,
//!   missingness simulation and on-disk formats.
//! - [`graph`]: embedded affinity / Laplacian construction.
//! - [`norms`]: Γ-norm, L2,1-norm and the Γ-norm proximal operator.
//! - [`solver`]: the alternating optimiser.
//! - [`metrics`]: ACC, NMI and purity.
//! - [`baselines`]: k-means, best-single-view and concatenation baselines.

pub mod baselines;
pub mod dataset;
mod error;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod norms;
pub mod report;
pub mod solver;

pub use error::{Result, UimcError};

pub use nalgebra::{DMatrix, DVector};
