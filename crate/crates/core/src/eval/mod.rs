//! RMSE, cold-start cluster analysis, baselines, and sweep harnesses.

mod baseline;
mod clusters;
mod metrics;
mod report;
mod sweep;

pub use baseline::{bias_baseline, BiasBaseline};
pub use clusters::{cluster_rmse, improvement, recombine, ClusterRmse};
pub use metrics::{rmse, FnPredictor, Predictor};
pub use report::{summarize_seeds, EvalReport, SeedSummary};
pub use sweep::{
    evaluate, run_experiment, sweep_dae, sweep_training_ratio, write_rows_csv, DaeCell, Experiment,
    RatioRow,
};
