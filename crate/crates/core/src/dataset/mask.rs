use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{build_indicator, IncompleteDataset, MultiViewDataset};
use crate::{Result, UimcError};

/// Per-view missing rates plus the sampling seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaskSpec {
    pub rates: Vec<f64>,
    pub seed: u64,
}

impl MaskSpec {
    pub fn new(rates: Vec<f64>, seed: u64) -> Result<Self> {
        if let Some(bad) = rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(UimcError::invalid(format!("missing rate {bad} outside [0, 1]")));
        }
        Ok(Self { rates, seed })
    }

    /// Average missing rate over views (PER).
    pub fn average_rate(&self) -> f64 {
        if self.rates.is_empty() {
            0.0
        } else {
            self.rates.iter().sum::<f64>() / self.rates.len() as f64
        }
    }
}

/// Missing rates from a multiplier vector scaled by an average rate, e.g.
/// multipliers `(0.2, 1.0, 1.8)` at PER `0.1` give `(0.02, 0.1, 0.18)`.
///
/// Rates above 1 are clamped to 1 with a warning; the view is then emptied.
pub fn rates_from_multipliers(multipliers: &[f64], per: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&per) {
        return Err(UimcError::invalid(format!("PER {per} outside [0, 1]")));
    }
    multipliers
        .iter()
        .enumerate()
        .map(|(v, &mult)| {
            if mult < 0.0 || !mult.is_finite() {
                return Err(UimcError::invalid(format!(
                    "multiplier {mult} for view {v} must be a nonnegative number"
                )));
            }
            let rate = mult * per;
            if rate > 1.0 {
                log::warn!("view {v}: rate {mult} x {per} = {rate} clamped to 1.0");
                Ok(1.0)
            } else {
                Ok(rate)
            }
        })
        .collect()
}

/// Number of columns removed for rate `rate` out of `m`: half-up rounding.
pub(crate) fn removed_count(rate: f64, m: usize) -> usize {
    ((rate * m as f64).round() as usize).min(m)
}

/// Deletes `round(r_v * m)` uniformly chosen instances from each view.
///
/// Views are sampled independently, in view order, from a single ChaCha8
/// stream seeded by `spec.seed`.
pub fn apply_mask(data: &MultiViewDataset, spec: &MaskSpec) -> Result<IncompleteDataset> {
    if spec.rates.len() != data.n_views() {
        return Err(UimcError::shape(format!(
            "{} missing rates for {} views",
            spec.rates.len(),
            data.n_views()
        )));
    }
    let spec = MaskSpec::new(spec.rates.clone(), spec.seed)?;
    let m = data.m();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let presented: Vec<Vec<usize>> = spec
        .rates
        .iter()
        .map(|&rate| {
            let removed = removed_count(rate, m);
            let mut gone = vec![false; m];
            for j in sample(&mut rng, m, removed).iter() {
                gone[j] = true;
            }
            (0..m).filter(|&j| !gone[j]).collect()
        })
        .collect();
    apply_presented(data, &presented)
}

/// Masks `data` with explicit presented index lists, one per view.
pub fn apply_presented(data: &MultiViewDataset, presented: &[Vec<usize>]) -> Result<IncompleteDataset> {
    if presented.len() != data.n_views() {
        return Err(UimcError::shape(format!(
            "{} presented lists for {} views",
            presented.len(),
            data.n_views()
        )));
    }
    let mut views = Vec::with_capacity(presented.len());
    let mut indicators = Vec::with_capacity(presented.len());
    for (full, idx) in data.views().iter().zip(presented) {
        let ind = build_indicator(idx, data.m())?;
        views.push(ind.select_columns(full));
        indicators.push(ind);
    }
    IncompleteDataset::new(views, indicators, data.c(), data.labels().map(<[usize]>::to_vec))
}
