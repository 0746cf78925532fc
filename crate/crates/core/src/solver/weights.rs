//! View weights: initialisation from presented-instance counts and the
//! per-iteration multiplicative update with cumulative bounds.

use crate::dataset::{IncompleteDataset, ViewClass};
use crate::{Result, UimcError};

use super::SolverConfig;

/// Initial weights: zero for dying views, otherwise proportional to the
/// number of presented instances, normalised to sum to one over the
/// remaining views.
pub fn initial_weights(incomplete: &IncompleteDataset) -> Result<Vec<f64>> {
    weights_from_counts(&incomplete.presented_counts(), incomplete.c())
}

pub fn weights_from_counts(counts: &[usize], c: usize) -> Result<Vec<f64>> {
    let alive: Vec<bool> = counts.iter().map(|&k| k >= c).collect();
    let n_alive = alive.iter().filter(|&&a| a).count();
    if n_alive == 0 {
        return Err(UimcError::Unsolvable(format!(
            "every view has fewer than {c} presented instances"
        )));
    }
    let total: usize = counts.iter().sum();
    let raw: Vec<f64> = counts
        .iter()
        .zip(&alive)
        .map(|(&k, &a)| {
            if a {
                k as f64 / total as f64 * counts.len() as f64
            } else {
                0.0
            }
        })
        .collect();
    Ok(normalize(&raw))
}

/// Rescales to unit sum; an all-zero vector is returned unchanged.
pub fn normalize(w: &[f64]) -> Vec<f64> {
    let s: f64 = w.iter().sum();
    if s > 0.0 {
        w.iter().map(|v| v / s).collect()
    } else {
        w.to_vec()
    }
}

/// `(∏_{j=1..iter} (1 − 0.2^j), ∏_{j=1..iter} (1 + 0.2^j))`.
pub fn bound_factors(iter: usize) -> (f64, f64) {
    (1..=iter).fold((1.0, 1.0), |(lo, hi), j| {
        let step = 0.2f64.powi(j as i32);
        (lo * (1.0 - step), hi * (1.0 + step))
    })
}

/// One multiplicative update `μ·w` clamped to
/// `[w_init·∏(1 − 0.2^j), w_init·∏(1 + 0.2^j)]`, products over `j = 1..iter`.
pub fn evolve_weight(w: f64, mu: f64, iter: usize, w_init: f64) -> f64 {
    let (lo, hi) = bound_factors(iter);
    (mu * w).clamp(w_init * lo, w_init * hi)
}

pub fn mu_for(class: ViewClass, config: &SolverConfig) -> f64 {
    match class {
        ViewClass::Strong => config.mu_strong,
        ViewClass::Weak => config.mu_weak,
        ViewClass::Neutral => config.mu_neutral,
        ViewClass::Dying => 0.0,
    }
}

/// Updates every weight by its class factor and renormalises. Dying views
/// stay at zero.
pub fn evolve_weights(
    weights: &[f64],
    classes: &[ViewClass],
    iter: usize,
    w_init: &[f64],
    config: &SolverConfig,
) -> Vec<f64> {
    let raw: Vec<f64> = weights
        .iter()
        .zip(classes)
        .zip(w_init)
        .map(|((&w, &class), &w0)| match class {
            ViewClass::Dying => 0.0,
            _ => evolve_weight(w, mu_for(class, config), iter, w0),
        })
        .collect();
    normalize(&raw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_views_share_equally() {
        let w = weights_from_counts(&[169, 169, 169], 6).unwrap();
        for v in w {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn dying_view_gets_zero() {
        let w = weights_from_counts(&[100, 4, 50], 5).unwrap();
        assert_eq!(w[1], 0.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn proportional_to_counts() {
        let w = weights_from_counts(&[120, 60, 20], 3).unwrap();
        let expected = [0.6, 0.3, 0.1];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn all_dying_is_unsolvable() {
        assert!(matches!(weights_from_counts(&[1, 2], 3), Err(UimcError::Unsolvable(_))));
    }

    #[test]
    fn strong_step_within_bounds() {
        let (lo, hi) = bound_factors(1);
        assert!((0.3 * lo - 0.24).abs() < 1e-15);
        assert!((0.3 * hi - 0.36).abs() < 1e-15);
        assert!((evolve_weight(0.3, 1.1, 1, 0.3) - 0.33).abs() < 1e-15);
    }

    #[test]
    fn clamped_above() {
        assert!((evolve_weight(0.3, 2.0, 1, 0.3) - 0.36).abs() < 1e-15);
        assert!((evolve_weight(0.3, 0.1, 1, 0.3) - 0.24).abs() < 1e-15);
    }

    #[test]
    fn neutral_is_unchanged() {
        assert_eq!(evolve_weight(0.3, 1.0, 3, 0.3), 0.3);
        let cfg = SolverConfig::default();
        let w = evolve_weights(
            &[0.5, 0.5],
            &[ViewClass::Neutral, ViewClass::Neutral],
            1,
            &[0.5, 0.5],
            &cfg,
        );
        assert_eq!(w, vec![0.5, 0.5]);
    }

    #[test]
    fn bounds_widen_monotonically() {
        let mut prev = bound_factors(0);
        for i in 1..30 {
            let cur = bound_factors(i);
            assert!(cur.0 <= prev.0 && cur.1 >= prev.1);
            prev = cur;
        }
        assert!(prev.0 > 0.75 && prev.1 < 1.27);
    }

    #[test]
    fn simplex_after_evolution() {
        let cfg = SolverConfig::default();
        let classes = [ViewClass::Strong, ViewClass::Weak, ViewClass::Dying];
        let w0 = weights_from_counts(&[90, 30, 1], 3).unwrap();
        let mut w = w0.clone();
        for it in 1..20 {
            w = evolve_weights(&w, &classes, it, &w0, &cfg);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert_eq!(w[2], 0.0);
            assert!(w[0] > w[1]);
        }
    }
}
