//! Seeded synthetic multi-view data.
//!
//! `c` Gaussian clusters are drawn in a latent space; every view is a random
//! linear map of the latent points plus isotropic Gaussian noise. By default
//! each cluster occupies its own block of latent coordinates, so clusters lie
//! on distinct linear subspaces.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::MultiViewDataset;
use crate::{Result, UimcError};

/// Placement of the clusters in latent space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatentLayout {
    /// All clusters share one `latent_dim`-dimensional space.
    Shared,
    /// Cluster `k` lives in coordinates `k·latent_dim .. (k+1)·latent_dim` of a
    /// `c·latent_dim`-dimensional space.
    Disjoint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticParams {
    pub m: usize,
    pub c: usize,
    /// Feature dimension of each view.
    pub dims: Vec<usize>,
    /// Latent dimension per cluster (`Disjoint`) or in total (`Shared`).
    pub latent_dim: usize,
    pub layout: LatentLayout,
    /// Standard deviation of the cluster centres; points have unit spread
    /// around their centre in latent space.
    pub separation: f64,
    /// Standard deviation of the per-view observation noise.
    pub noise: f64,
    pub seed: u64,
}

impl Default for SyntheticParams {
    fn default() -> Self {
        Self {
            m: 150,
            c: 3,
            dims: vec![30, 40, 20],
            latent_dim: 2,
            layout: LatentLayout::Disjoint,
            separation: 1.0,
            noise: 0.05,
            seed: 0,
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Generates a labelled dataset; instance `j` belongs to cluster `j % c`.
pub fn generate(params: &SyntheticParams) -> Result<MultiViewDataset> {
    let SyntheticParams {
        m,
        c,
        ref dims,
        latent_dim,
        layout,
        separation,
        noise,
        seed,
    } = *params;
    if c < 2 || m < 5 * c {
        return Err(UimcError::invalid(format!(
            "need c >= 2 and m >= 5c, got m = {m}, c = {c}"
        )));
    }
    if dims.is_empty() || dims.contains(&0) || latent_dim == 0 {
        return Err(UimcError::invalid(
            "every view and the latent space need >= 1 dimension",
        ));
    }
    if !(noise >= 0.0 && separation >= 0.0) {
        return Err(UimcError::invalid("noise and separation must be nonnegative"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<usize> = (0..m).map(|j| j % c).collect();
    let centres = DMatrix::from_fn(latent_dim, c, |_, _| separation * normal(&mut rng));
    let total_dim = match layout {
        LatentLayout::Shared => latent_dim,
        LatentLayout::Disjoint => c * latent_dim,
    };
    let mut latent = DMatrix::zeros(total_dim, m);
    for (j, &k) in labels.iter().enumerate() {
        let offset = match layout {
            LatentLayout::Shared => 0,
            LatentLayout::Disjoint => k * latent_dim,
        };
        for i in 0..latent_dim {
            latent[(offset + i, j)] = centres[(i, k)] + normal(&mut rng);
        }
    }
    let scale = 1.0 / (total_dim as f64).sqrt();
    let views = dims
        .iter()
        .map(|&d| {
            let map = DMatrix::from_fn(d, total_dim, |_, _| scale * normal(&mut rng));
            let clean = &map * &latent;
            DMatrix::from_fn(d, m, |i, j| clean[(i, j)] + noise * normal(&mut rng))
        })
        .collect();
    MultiViewDataset::new(views, Some(labels), c)
}
