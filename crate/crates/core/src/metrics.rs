//! Clustering evaluation: accuracy under the best one-to-one label matching,
//! normalized mutual information and purity.

use serde::{Deserialize, Serialize};

use crate::{Result, UimcError};

/// Predicted and ground-truth labels for the same instances.
#[derive(Debug, Clone, Copy)]
pub struct LabelPair<'a> {
    pub predicted: &'a [usize],
    pub truth: &'a [usize],
}

impl<'a> LabelPair<'a> {
    pub fn new(predicted: &'a [usize], truth: &'a [usize]) -> Result<Self> {
        if predicted.len() != truth.len() {
            return Err(UimcError::shape(format!(
                "{} predicted labels vs {} true labels",
                predicted.len(),
                truth.len()
            )));
        }
        if predicted.is_empty() {
            return Err(UimcError::invalid("cannot score an empty labelling"));
        }
        Ok(Self { predicted, truth })
    }

    /// Contingency table `counts[p][t]`.
    fn contingency(&self) -> Vec<Vec<u64>> {
        let rows = self.predicted.iter().max().map_or(0, |&v| v + 1);
        let cols = self.truth.iter().max().map_or(0, |&v| v + 1);
        let mut table = vec![vec![0u64; cols]; rows];
        for (&p, &t) in self.predicted.iter().zip(self.truth) {
            table[p][t] += 1;
        }
        table
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub acc: f64,
    pub nmi: f64,
    pub purity: f64,
}

pub fn evaluate(predicted: &[usize], truth: &[usize]) -> Result<Scores> {
    let pair = LabelPair::new(predicted, truth)?;
    Ok(Scores {
        acc: accuracy(pair),
        nmi: nmi(pair),
        purity: purity(pair),
    })
}

/// Fraction of instances matched under the best bijection between predicted
/// and true labels, found with the Hungarian method.
pub fn accuracy(pair: LabelPair<'_>) -> f64 {
    let table = pair.contingency();
    let n = table.len().max(table.first().map_or(0, Vec::len));
    // maximise matches == minimise negated counts on a square padded table
    let cost: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| -(table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0) as i64))
                .collect()
        })
        .collect();
    let assignment = hungarian(&cost);
    let matched: i64 = assignment.iter().enumerate().map(|(i, &j)| -cost[i][j]).sum();
    matched as f64 / pair.predicted.len() as f64
}

/// Minimum-cost perfect assignment on a square matrix; returns the column
/// assigned to each row.
pub fn hungarian(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    // potentials and matching are 1-based with a sentinel column 0
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![i64::MAX; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = i64::MAX;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        out[row_of[j] - 1] = j - 1;
    }
    out
}

fn entropy(counts: impl Iterator<Item = u64>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalised by the geometric mean of the two entropies.
/// Zero when either labelling has a single cluster.
pub fn nmi(pair: LabelPair<'_>) -> f64 {
    let table = pair.contingency();
    let n = pair.predicted.len() as f64;
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let cols = table.first().map_or(0, Vec::len);
    let col_sums: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    let hp = entropy(row_sums.iter().copied(), n);
    let ht = entropy(col_sums.iter().copied(), n);
    if hp <= 0.0 || ht <= 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (row_sums[i] as f64 * col_sums[j] as f64)).ln();
            }
        }
    }
    (mi / (hp * ht).sqrt()).clamp(0.0, 1.0)
}

/// Fraction of instances belonging to the majority true class of their
/// predicted cluster.
pub fn purity(pair: LabelPair<'_>) -> f64 {
    let table = pair.contingency();
    let majority: u64 = table.iter().map(|r| r.iter().copied().max().unwrap_or(0)).sum();
    majority as f64 / pair.predicted.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair<'a>(p: &'a [usize], t: &'a [usize]) -> LabelPair<'a> {
        LabelPair::new(p, t).unwrap()
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(pair(&[0, 1, 2, 1], &[0, 1, 2, 1])), 1.0);
        assert_eq!(accuracy(pair(&[2, 0, 1, 0], &[0, 1, 2, 1])), 1.0);
        assert_eq!(accuracy(pair(&[1, 1, 1, 0], &[0, 0, 1, 1])), 0.75);
    }

    #[test]
    fn nmi_cases() {
        assert!((nmi(pair(&[0, 0, 1, 1, 2], &[0, 0, 1, 1, 2])) - 1.0).abs() < 1e-12);
        assert_eq!(nmi(pair(&[0, 0, 0, 0], &[0, 0, 1, 1])), 0.0);
        assert!(nmi(pair(&[0, 1, 0, 1], &[0, 0, 1, 1])).abs() < 1e-12);
    }

    #[test]
    fn purity_cases() {
        assert_eq!(purity(pair(&[0, 1, 2], &[0, 1, 2])), 1.0);
        assert_eq!(purity(pair(&[0, 0, 0, 0, 0], &[1, 1, 1, 0, 2])), 0.6);
        assert_eq!(purity(pair(&[0, 0, 0, 1], &[0, 0, 1, 2])), 0.75);
    }

    #[test]
    fn mismatched_lengths() {
        assert!(LabelPair::new(&[0, 1], &[0]).is_err());
        assert!(evaluate(&[], &[]).is_err());
    }

    #[test]
    fn more_predicted_clusters_than_classes() {
        // best matching leaves one predicted cluster unmatched
        assert_eq!(accuracy(pair(&[0, 1, 2, 2], &[0, 0, 1, 1])), 0.75);
    }

    #[test]
    fn refined_partition_purity_bound() {
        let truth = [0, 0, 0, 1, 1, 2];
        let refined = [0, 1, 1, 2, 3, 4];
        let max_freq = 3.0 / 6.0;
        assert!(purity(pair(&refined, &truth)) >= max_freq);
        assert_eq!(purity(pair(&refined, &truth)), 1.0);
    }

    #[test]
    fn hungarian_small() {
        let cost = vec![vec![4, 1, 3], vec![2, 0, 5], vec![3, 2, 2]];
        let a = hungarian(&cost);
        let total: i64 = a.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        assert_eq!(total, 5);
    }
}
