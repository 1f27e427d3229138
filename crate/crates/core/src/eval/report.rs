use serde::{Deserialize, Serialize};

use super::ClusterRmse;

/// Outcome of evaluating one trained configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub rmse: f64,
    pub n_test: usize,
    pub per_cluster: Vec<ClusterRmse>,
    pub config_digest: String,
    pub seed: u64,
}

/// Mean and a ±2σ band over repeated seeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub mean: f64,
    /// Twice the sample standard deviation (0 for a single run).
    pub two_sigma: f64,
    pub runs: usize,
}

pub fn summarize_seeds(values: &[f64]) -> Option<SeedSummary> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    Some(SeedSummary {
        mean,
        two_sigma: 2.0 * var.sqrt(),
        runs: values.len(),
    })
}
