use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Result, UimcError};

pub const DEFAULT_RESTARTS: usize = 10;
const MAX_LLOYD_ITERS: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: DMatrix<f64>,
    /// Within-cluster sum of squared distances.
    pub inertia: f64,
}

/// Seeded k-means on the rows of `points` (`n × d`): k-means++ seeding,
/// Lloyd iterations to a fixed point, best of [`DEFAULT_RESTARTS`] restarts.
pub fn kmeans(points: &DMatrix<f64>, c: usize, seed: u64) -> Result<KMeansResult> {
    kmeans_with_restarts(points, c, seed, DEFAULT_RESTARTS)
}

pub fn kmeans_with_restarts(points: &DMatrix<f64>, c: usize, seed: u64, restarts: usize) -> Result<KMeansResult> {
    let n = points.nrows();
    if c == 0 || n < c {
        return Err(UimcError::invalid(format!(
            "k-means needs 1 <= c <= n, got c = {c}, n = {n}"
        )));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(UimcError::numerical("k-means", "non-finite point coordinates"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeansResult> = None;
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, plus_plus(points, c, &mut rng));
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

fn sq_dist(points: &DMatrix<f64>, i: usize, centroids: &DMatrix<f64>, k: usize) -> f64 {
    points
        .row(i)
        .iter()
        .zip(centroids.row(k).iter())
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

fn plus_plus(points: &DMatrix<f64>, c: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let n = points.nrows();
    let mut chosen = Vec::with_capacity(c);
    chosen.push(rng.random_range(0..n));
    let mut centroids = DMatrix::zeros(c, points.ncols());
    centroids.set_row(0, &points.row(chosen[0]));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(points, i, &centroids, 0)).collect();
    for k in 1..c {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if w > 0.0 {
                    if target < w {
                        pick = i;
                        break;
                    }
                    target -= w;
                }
            }
            while d2[pick] == 0.0 {
                pick -= 1;
            }
            pick
        } else {
            // every remaining point coincides with a centre
            let free: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen.push(next);
        centroids.set_row(k, &points.row(next));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points, i, &centroids, k));
        }
    }
    centroids
}

fn assign(points: &DMatrix<f64>, centroids: &DMatrix<f64>) -> (Vec<usize>, Vec<f64>) {
    (0..points.nrows())
        .map(|i| {
            (0..centroids.nrows())
                .map(|k| (k, sq_dist(points, i, centroids, k)))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
        })
        .unzip()
}

fn lloyd(points: &DMatrix<f64>, mut centroids: DMatrix<f64>) -> KMeansResult {
    let c = centroids.nrows();
    let (mut labels, mut dists) = assign(points, &centroids);
    for _ in 0..MAX_LLOYD_ITERS {
        let mut sums = DMatrix::zeros(c, points.ncols());
        let mut counts = vec![0usize; c];
        for (i, &l) in labels.iter().enumerate() {
            counts[l] += 1;
            let mut row = sums.row_mut(l);
            row += points.row(i);
        }
        for k in 0..c {
            if counts[k] > 0 {
                centroids.set_row(k, &(sums.row(k) / counts[k] as f64));
            } else {
                // re-seed an empty cluster at the point farthest from its centre
                let far = dists
                    .iter()
                    .enumerate()
                    .fold(0, |b, (i, &d)| if d > dists[b] { i } else { b });
                centroids.set_row(k, &points.row(far));
                dists[far] = 0.0;
            }
        }
        let (next, next_d) = assign(points, &centroids);
        dists = next_d;
        if next == labels {
            break;
        }
        labels = next;
    }
    KMeansResult {
        inertia: dists.iter().sum(),
        labels,
        centroids,
    }
}
