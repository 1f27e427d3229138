use serde::{Deserialize, Serialize};

use super::Predictor;
use crate::data::{Axis, RatingMatrix};
use crate::error::{CfnError, Result};

/// RMSE restricted to the test entries of one group of entities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterRmse {
    /// Quantile interval, e.g. `0.0-0.2`.
    pub label: String,
    /// Omitted when the group has no test entries.
    pub rmse: Option<f64>,
    pub n_entries: usize,
    pub n_entities: usize,
}

/// Sorts entities along `by` by ascending number of training ratings (ties
/// by index), cuts them into `n_clusters` groups of equal size (±1), and
/// reports the RMSE of each group's test entries.
pub fn cluster_rmse<P: Predictor + ?Sized>(
    predictor: &P,
    test: &RatingMatrix,
    train: &RatingMatrix,
    by: Axis,
    n_clusters: usize,
) -> Result<Vec<ClusterRmse>> {
    if n_clusters == 0 {
        return Err(CfnError::InvalidArgument(
            "need at least one cluster".into(),
        ));
    }
    if test.is_empty() {
        return Err(CfnError::InvalidArgument("empty test set".into()));
    }
    let counts = train.counts(by);
    let n = counts.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&e| (counts[e], e));
    let mut cluster_of = vec![0usize; n];
    let mut sizes = vec![0usize; n_clusters];
    for (pos, &e) in order.iter().enumerate() {
        let c = pos * n_clusters / n.max(1);
        cluster_of[e] = c;
        sizes[c] += 1;
    }

    let mut sums = vec![0.0; n_clusters];
    let mut hits = vec![0usize; n_clusters];
    for r in test.entries() {
        let entity = match by {
            Axis::User => r.user,
            Axis::Item => r.item,
        } as usize;
        let c = cluster_of[entity];
        let err = predictor.predict(r.user as usize, r.item as usize)? - r.value;
        sums[c] += err * err;
        hits[c] += 1;
    }

    Ok((0..n_clusters)
        .map(|c| ClusterRmse {
            label: format!(
                "{:.1}-{:.1}",
                c as f64 / n_clusters as f64,
                (c + 1) as f64 / n_clusters as f64
            ),
            rmse: (hits[c] > 0).then(|| (sums[c] / hits[c] as f64).sqrt()),
            n_entries: hits[c],
            n_entities: sizes[c],
        })
        .collect())
}

/// `100 · (base − with_side) / base` per cluster.
pub fn improvement(base: &[ClusterRmse], with_side: &[ClusterRmse]) -> Vec<Option<f64>> {
    base.iter()
        .zip(with_side)
        .map(|(b, s)| match (b.rmse, s.rmse) {
            (Some(b), Some(s)) if b > 0.0 => Some(100.0 * (b - s) / b),
            _ => None,
        })
        .collect()
}

/// Global RMSE implied by per-cluster RMSEs.
pub fn recombine(clusters: &[ClusterRmse]) -> Option<f64> {
    let n: usize = clusters.iter().map(|c| c.n_entries).sum();
    if n == 0 {
        return None;
    }
    let sq: f64 = clusters
        .iter()
        .filter_map(|c| c.rmse.map(|r| r * r * c.n_entries as f64))
        .sum();
    Some((sq / n as f64).sqrt())
}
