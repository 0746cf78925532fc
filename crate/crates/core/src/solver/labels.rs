use nalgebra::DMatrix;

use crate::baselines::kmeans;
use crate::Result;

/// Cluster labels from a consensus embedding: rows are scaled to unit
/// length (zero rows stay zero), then clustered by seeded k-means.
pub fn extract_labels(f_star: &DMatrix<f64>, c: usize, seed: u64) -> Result<Vec<usize>> {
    let mut rows = f_star.clone();
    for mut row in rows.row_iter_mut() {
        let n = row.norm();
        if n > 0.0 {
            row /= n;
        }
    }
    Ok(kmeans(&rows, c, seed)?.labels)
}
