use serde::{Deserialize, Serialize};

use crate::data::{Axis, RatingMatrix};
use crate::error::{CfnError, Result};

/// Per-entity mean ratings used to center the input vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiasTable {
    pub orientation: Axis,
    pub means: Vec<f64>,
    pub global_mean: f64,
}

impl BiasTable {
    /// Mean of `entity`, or the global mean when out of range.
    pub fn mean(&self, entity: usize) -> f64 {
        self.means.get(entity).copied().unwrap_or(self.global_mean)
    }
}

/// Means over training entries only; entities without any take the global mean.
pub fn fit_bias(train: &RatingMatrix, orientation: Axis) -> Result<BiasTable> {
    if train.is_empty() {
        return Err(CfnError::NoRatings);
    }
    let n = match orientation {
        Axis::User => train.n_users(),
        Axis::Item => train.n_items(),
    };
    let mut sums = vec![0.0; n];
    let mut counts = vec![0usize; n];
    let mut total = 0.0;
    for r in train.entries() {
        let e = match orientation {
            Axis::User => r.user,
            Axis::Item => r.item,
        } as usize;
        sums[e] += r.value;
        counts[e] += 1;
        total += r.value;
    }
    let global_mean = total / train.len() as f64;
    let means = sums
        .iter()
        .zip(&counts)
        .map(|(&s, &c)| if c == 0 { global_mean } else { s / c as f64 })
        .collect();
    Ok(BiasTable {
        orientation,
        means,
        global_mean,
    })
}
