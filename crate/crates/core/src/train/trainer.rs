use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Orientation, SideInfoMode, TrainConfig};
use crate::data::RatingSource;
use crate::error::{CfnError, Result};
use crate::model::{
    self, AutoencoderParams, CorruptionMask, GradientTouch, Gradients, SparseVector,
};
use crate::preprocess::{Preprocessor, SideInfoTable};

/// A trained (or training) network together with everything needed to map
/// its outputs back to ratings.
#[derive(Debug, Clone, PartialEq)]
pub struct CfnModel {
    pub config: TrainConfig,
    pub params: AutoencoderParams,
    pub preprocessor: Preprocessor,
}

impl CfnModel {
    pub fn orientation(&self) -> Orientation {
        self.config.orientation
    }

    /// Width of the side vector the network expects, 0 without side information.
    pub fn side_dim(&self) -> usize {
        self.params.side_dim()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub loss: f64,
    pub rmse: Option<f64>,
}

/// Training progress. The random stream of epoch `e` is derived from
/// `(config.seed, e)`, so `(model, epoch)` is enough to resume exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub model: CfnModel,
    /// Completed epochs.
    pub epoch: usize,
    pub loss_curve: Vec<EpochRecord>,
}

/// Called after every epoch with its index; may return a validation RMSE
/// to be recorded in the loss curve.
pub type EpochHook<'a> = dyn FnMut(usize, &CfnModel) -> Result<Option<f64>> + 'a;

const INIT_STREAM: u64 = 0;

fn epoch_rng(seed: u64, epoch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(epoch as u64 + 1);
    rng
}

/// Transformed input vectors for every entity with at least one rating.
pub fn build_samples<S: RatingSource + ?Sized>(
    source: &S,
    orientation: Orientation,
    preprocessor: &Preprocessor,
) -> Result<Vec<(usize, SparseVector)>> {
    let axis = orientation.axis();
    let dim = source.n_entities(axis.other());
    let mut samples = Vec::new();
    for entity in 0..source.n_entities(axis) {
        let known = source.vector(axis, entity);
        if known.is_empty() {
            continue;
        }
        let entries = known
            .iter()
            .map(|&(j, r)| Ok((j, preprocessor.transform(r, entity)?)))
            .collect::<Result<Vec<_>>>()?;
        samples.push((entity, SparseVector::new(dim, entries)?));
    }
    Ok(samples)
}

fn side_widths(
    cfg: &TrainConfig,
    side: Option<&SideInfoTable>,
    n_entities: usize,
) -> Result<(usize, usize)> {
    if cfg.side_info == SideInfoMode::None {
        return Ok((0, 0));
    }
    let side = side.ok_or_else(|| {
        CfnError::InvalidArgument(format!(
            "side-info mode {} needs a side-information table",
            cfg.side_info
        ))
    })?;
    if side.n_entities() != n_entities || side.dim() == 0 {
        return Err(CfnError::Dimension(format!(
            "side information covers {} entities with {} features; {} entities expected",
            side.n_entities(),
            side.dim(),
            n_entities
        )));
    }
    let p = side.dim();
    Ok((
        if cfg.side_info.feeds_input() { p } else { 0 },
        if cfg.side_info.feeds_hidden() { p } else { 0 },
    ))
}

/// Trains from freshly initialized parameters. `preprocessor` must have been
/// fitted on `source` alone.
pub fn train<S: RatingSource + ?Sized>(
    source: &S,
    side: Option<&SideInfoTable>,
    config: &TrainConfig,
    preprocessor: &Preprocessor,
    hook: Option<&mut EpochHook<'_>>,
) -> Result<TrainState> {
    config.validate()?;
    let axis = config.orientation.axis();
    let n = source.n_entities(axis.other());
    let (p_in, p_hidden) = side_widths(config, side, source.n_entities(axis))?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(INIT_STREAM);
    let params = AutoencoderParams::init(n, config.hidden, p_in, p_hidden, &mut rng)?;
    let state = TrainState {
        model: CfnModel {
            config: config.clone(),
            params,
            preprocessor: preprocessor.clone(),
        },
        epoch: 0,
        loss_curve: Vec::new(),
    };
    resume(state, source, side, hook)
}

/// Runs the remaining epochs of `state.model.config`.
pub fn resume<S: RatingSource + ?Sized>(
    mut state: TrainState,
    source: &S,
    side: Option<&SideInfoTable>,
    mut hook: Option<&mut EpochHook<'_>>,
) -> Result<TrainState> {
    let config = state.model.config.clone();
    config.validate()?;
    let axis = config.orientation.axis();
    let n = source.n_entities(axis.other());
    if state.model.params.n() != n {
        return Err(CfnError::Dimension(format!(
            "network width {} but rating vectors of length {n}",
            state.model.params.n()
        )));
    }
    let (p_in, p_hidden) = side_widths(&config, side, source.n_entities(axis))?;
    if (p_in, p_hidden) != (state.model.params.p_in(), state.model.params.p_hidden()) {
        return Err(CfnError::Dimension(
            "side-information widths differ from the network".into(),
        ));
    }
    let side_rows = |entity: usize| -> &[f64] {
        match side {
            Some(table) if p_in + p_hidden > 0 => table.row(entity),
            _ => &[],
        }
    };

    let samples = build_samples(source, config.orientation, &state.model.preprocessor)?;
    let weights = config.loss_weights(n)?;
    let mut grads = Gradients::zeros_like(&state.model.params);
    let mut touch = GradientTouch::new(&state.model.params);
    let mut order: Vec<usize> = (0..samples.len()).collect();

    while state.epoch < config.epochs {
        let epoch = state.epoch;
        let lr = config.learning_rate(epoch);
        let mut rng = epoch_rng(config.seed, epoch);
        order.sort_unstable();
        order.shuffle(&mut rng);

        let mut total_loss = 0.0;
        for (batch, chunk) in order.chunks(config.batch_size).enumerate() {
            let params = &state.model.params;
            let reg = if weights.lambda > 0.0 {
                weights.lambda * params.weight_norm_sq()
            } else {
                0.0
            };
            let mut batch_loss = 0.0;
            for &s in chunk {
                let (entity, x) = &samples[s];
                let (x_tilde, mask): (SparseVector, CorruptionMask) =
                    model::corrupt(x, config.mask_ratio, &mut rng)?;
                batch_loss += model::loss::accumulate(
                    params,
                    x,
                    &x_tilde,
                    &mask,
                    side_rows(*entity),
                    weights,
                    Some((&mut grads, Some(&mut touch))),
                ) + reg;
            }
            if !batch_loss.is_finite() {
                return Err(CfnError::Diverged {
                    epoch,
                    batch,
                    gradient_norm: grads.norm(),
                });
            }
            total_loss += batch_loss;
            sgd_step(
                &mut state.model.params,
                &mut grads,
                &mut touch,
                lr / chunk.len() as f64,
                lr * weights.lambda,
            );
        }
        if !state.model.params.is_finite() {
            return Err(CfnError::Diverged {
                epoch,
                batch: order.len().div_ceil(config.batch_size),
                gradient_norm: f64::NAN,
            });
        }

        state.epoch += 1;
        let loss = total_loss / samples.len().max(1) as f64;
        let rmse = match hook.as_mut() {
            Some(h) => h(epoch, &state.model)?,
            None => None,
        };
        log::info!(
            "epoch {epoch}: lr {lr:.4}, loss {loss:.5}{}",
            rmse.map(|r| format!(", rmse {r:.5}")).unwrap_or_default()
        );
        state.loss_curve.push(EpochRecord { epoch, loss, rmse });
    }
    Ok(state)
}

/// `W ← (1 − 2·lr·λ) W − step · G` on the weights, `b ← b − step · g` on
/// the biases, touching the sparse gradient blocks only. Resets the
/// accumulated gradient.
fn sgd_step(
    params: &mut AutoencoderParams,
    grads: &mut Gradients,
    touch: &mut GradientTouch,
    step: f64,
    lr_lambda: f64,
) {
    if lr_lambda > 0.0 {
        let keep = 1.0 - 2.0 * lr_lambda;
        params.w1.iter_mut().for_each(|w| *w *= keep);
        params.w2.iter_mut().for_each(|w| *w *= keep);
    }
    let k = params.k();
    for &c in touch.w1_columns() {
        let range = c as usize * k..(c as usize + 1) * k;
        for (w, g) in params.w1[range.clone()]
            .iter_mut()
            .zip(&mut grads.w1[range])
        {
            *w -= step * *g;
            *g = 0.0;
        }
    }
    let width = k + params.p_hidden();
    for &r in touch.w2_rows() {
        let r = r as usize;
        let range = r * width..(r + 1) * width;
        for (w, g) in params.w2[range.clone()]
            .iter_mut()
            .zip(&mut grads.w2[range])
        {
            *w -= step * *g;
            *g = 0.0;
        }
        params.b2[r] -= step * grads.b2[r];
        grads.b2[r] = 0.0;
    }
    for (b, g) in params.b1.iter_mut().zip(grads.b1.iter_mut()) {
        *b -= step * *g;
        *g = 0.0;
    }
    touch.clear();
}
