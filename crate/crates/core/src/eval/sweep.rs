use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cluster_rmse, rmse, EvalReport};
use crate::data::{split, Axis, RatingMatrix, RatingScale, SplitSpec};
use crate::error::{CfnError, Result};
use crate::preprocess::{Preprocessor, SideInfoTable};
use crate::train::{train, CfnModel, CfnPredictor, EpochRecord, TrainConfig};

/// One trained configuration and its held-out RMSE.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub model: CfnModel,
    pub loss_curve: Vec<EpochRecord>,
    pub rmse: f64,
}

/// Fits the preprocessor on `train_set`, trains, and scores on `test`.
pub fn run_experiment(
    train_set: &RatingMatrix,
    test: &RatingMatrix,
    scale: RatingScale,
    side: Option<&SideInfoTable>,
    config: &TrainConfig,
) -> Result<Experiment> {
    let pre = Preprocessor::fit(train_set, scale, config.orientation.axis())?;
    let state = train(train_set, side, config, &pre, None)?;
    let predictor = CfnPredictor::new(&state.model, train_set, side)?;
    let rmse = rmse(&predictor, test)?;
    Ok(Experiment {
        model: state.model,
        loss_curve: state.loss_curve,
        rmse,
    })
}

/// Global and per-cluster RMSE of a trained model.
pub fn evaluate(
    model: &CfnModel,
    train_set: &RatingMatrix,
    test: &RatingMatrix,
    side: Option<&SideInfoTable>,
    by: Axis,
    n_clusters: usize,
) -> Result<EvalReport> {
    let predictor = CfnPredictor::new(model, train_set, side)?;
    Ok(EvalReport {
        rmse: rmse(&predictor, test)?,
        n_test: test.len(),
        per_cluster: cluster_rmse(&predictor, test, train_set, by, n_clusters)?,
        config_digest: model.config.digest(),
        seed: model.config.seed,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub ratio: f64,
    pub seed: u64,
    pub rmse: f64,
    pub config_digest: String,
}

/// For every (ratio, seed): a fresh split with that seed, training with
/// `config` (only the seed replaced), and the test RMSE. Rows come back
/// ratio-major in input order regardless of scheduling.
pub fn sweep_training_ratio(
    dataset: &RatingMatrix,
    scale: RatingScale,
    ratios: &[f64],
    config: &TrainConfig,
    seeds: &[u64],
    side: Option<&SideInfoTable>,
) -> Result<Vec<RatioRow>> {
    let specs = ratios
        .iter()
        .map(|&r| SplitSpec::new(r, 0))
        .collect::<Result<Vec<_>>>()?;
    if seeds.is_empty() {
        return Err(CfnError::InvalidArgument("no seeds given".into()));
    }
    let cells: Vec<(f64, u64)> = specs
        .iter()
        .flat_map(|s| seeds.iter().map(move |&seed| (s.train_fraction, seed)))
        .collect();
    cells
        .par_iter()
        .map(|&(ratio, seed)| {
            let (tr, te) = split(dataset, SplitSpec::new(ratio, seed)?)?;
            let cfg = TrainConfig {
                seed,
                ..config.clone()
            };
            let exp = run_experiment(&tr, &te, scale, side, &cfg)?;
            log::info!("ratio {ratio} seed {seed}: rmse {:.4}", exp.rmse);
            Ok(RatioRow {
                ratio,
                seed,
                rmse: exp.rmse,
                config_digest: cfg.digest(),
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DaeCell {
    pub beta: f64,
    pub mask_ratio: f64,
    /// Absent for cells that were not trained.
    pub rmse: Option<f64>,
    /// False when the loss is identically zero (β = 0 without corruption).
    pub valid: bool,
    pub config_digest: String,
}

/// Grid over β × mask ratio on one fixed split, α held at 1. Cells are
/// β-major in input order.
pub fn sweep_dae(
    dataset: &RatingMatrix,
    scale: RatingScale,
    split_spec: SplitSpec,
    betas: &[f64],
    mask_ratios: &[f64],
    config: &TrainConfig,
    side: Option<&SideInfoTable>,
) -> Result<Vec<DaeCell>> {
    if config.alpha != 1.0 {
        return Err(CfnError::InvalidArgument(format!(
            "the denoising grid keeps alpha at 1, got {}",
            config.alpha
        )));
    }
    let (tr, te) = split(dataset, split_spec)?;
    let cells: Vec<TrainConfig> = betas
        .iter()
        .flat_map(|&beta| {
            mask_ratios.iter().map(move |&mask_ratio| TrainConfig {
                beta,
                mask_ratio,
                ..config.clone()
            })
        })
        .collect();
    for c in &cells {
        c.validate()?;
    }
    cells
        .par_iter()
        .map(|cfg| {
            let valid = !(cfg.beta == 0.0 && cfg.mask_ratio == 0.0);
            let rmse = if valid {
                let exp = run_experiment(&tr, &te, scale, side, cfg)?;
                log::info!(
                    "beta {} mask {}: rmse {:.4}",
                    cfg.beta,
                    cfg.mask_ratio,
                    exp.rmse
                );
                Some(exp.rmse)
            } else {
                log::warn!("beta 0 with mask 0 has an identically zero loss; cell skipped");
                None
            };
            Ok(DaeCell {
                beta: cfg.beta,
                mask_ratio: cfg.mask_ratio,
                rmse,
                valid,
                config_digest: cfg.digest(),
            })
        })
        .collect()
}

/// Writes serializable rows as CSV with a header.
pub fn write_rows_csv<T: Serialize>(path: impl AsRef<Path>, rows: &[T]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(e) => CfnError::io(path, e),
        other => CfnError::InvalidArgument(format!("{other:?}")),
    })?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| CfnError::io(path, e))?;
    Ok(())
}
