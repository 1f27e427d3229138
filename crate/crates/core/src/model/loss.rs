use serde::{Deserialize, Serialize};

use super::forward::{axpy, check_inputs, hidden_unchecked, output_preactivation};
use super::{AutoencoderParams, CorruptionMask, SparseVector};
use crate::error::{CfnError, Result};

/// Weights of the denoising loss: `alpha` on corrupted known entries,
/// `beta` on the known entries left intact, `lambda` on `‖W‖²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossWeights {
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
}

impl LossWeights {
    pub fn new(alpha: f64, beta: f64, lambda: f64) -> Result<Self> {
        let ok = |v: f64| v.is_finite() && v >= 0.0;
        if !(ok(alpha) && ok(beta) && ok(lambda)) {
            return Err(CfnError::InvalidArgument(format!(
                "loss weights must be finite and non-negative (alpha={alpha}, beta={beta}, lambda={lambda})"
            )));
        }
        if alpha == 0.0 && beta == 0.0 {
            return Err(CfnError::InvalidArgument(
                "alpha and beta cannot both be zero".into(),
            ));
        }
        Ok(LossWeights {
            alpha,
            beta,
            lambda,
        })
    }
}

/// Gradient of the loss, laid out exactly like [`AutoencoderParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
    k: usize,
    w2_width: usize,
}

impl Gradients {
    pub fn zeros_like(params: &AutoencoderParams) -> Self {
        Gradients {
            w1: vec![0.0; params.w1.len()],
            b1: vec![0.0; params.b1.len()],
            w2: vec![0.0; params.w2.len()],
            b2: vec![0.0; params.b2.len()],
            k: params.k,
            w2_width: params.k + params.p_hidden,
        }
    }

    pub fn w1(&self, hidden: usize, input: usize) -> f64 {
        self.w1[input * self.k + hidden]
    }

    pub fn w2(&self, output: usize, hidden: usize) -> f64 {
        self.w2[output * self.w2_width + hidden]
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub fn norm(&self) -> f64 {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    /// Adds `2 λ W` to both weight blocks.
    fn add_weight_decay(&mut self, params: &AutoencoderParams, lambda: f64) {
        if lambda == 0.0 {
            return;
        }
        axpy(2.0 * lambda, &params.w1, &mut self.w1);
        axpy(2.0 * lambda, &params.w2, &mut self.w2);
    }
}

/// Records which columns of `W1` and rows of `W2` a sparse accumulation
/// wrote to, so an optimizer can update and reset only those.
#[derive(Debug, Clone)]
pub struct GradientTouch {
    w1_seen: Vec<bool>,
    w1_cols: Vec<u32>,
    w2_seen: Vec<bool>,
    w2_rows: Vec<u32>,
}

impl GradientTouch {
    pub fn new(params: &AutoencoderParams) -> Self {
        GradientTouch {
            w1_seen: vec![false; params.n + params.p_in],
            w1_cols: Vec::new(),
            w2_seen: vec![false; params.n],
            w2_rows: Vec::new(),
        }
    }

    fn col(&mut self, c: usize) {
        if !self.w1_seen[c] {
            self.w1_seen[c] = true;
            self.w1_cols.push(c as u32);
        }
    }

    fn row(&mut self, r: usize) {
        if !self.w2_seen[r] {
            self.w2_seen[r] = true;
            self.w2_rows.push(r as u32);
        }
    }

    pub fn w1_columns(&self) -> &[u32] {
        &self.w1_cols
    }

    pub fn w2_rows(&self) -> &[u32] {
        &self.w2_rows
    }

    pub fn clear(&mut self) {
        for &c in &self.w1_cols {
            self.w1_seen[c as usize] = false;
        }
        for &r in &self.w2_rows {
            self.w2_seen[r as usize] = false;
        }
        self.w1_cols.clear();
        self.w2_rows.clear();
    }
}

fn check_sample(x: &SparseVector, x_tilde: &SparseVector, mask: &CorruptionMask) -> Result<()> {
    if x.dim() != x_tilde.dim() {
        return Err(CfnError::Dimension(format!(
            "clean vector of dim {} but corrupted vector of dim {}",
            x.dim(),
            x_tilde.dim()
        )));
    }
    for &c in mask.indices() {
        if x.get(c as usize).is_none() {
            return Err(CfnError::InvalidArgument(format!(
                "corrupted index {c} is not a known entry"
            )));
        }
        if x_tilde.get(c as usize).is_some() {
            return Err(CfnError::InvalidArgument(format!(
                "corrupted index {c} is still present in the network input"
            )));
        }
    }
    Ok(())
}

/// Per-entry weight: `alpha` for corrupted entries, `beta` otherwise. Walks
/// the sorted mask alongside the sorted known indices.
struct EntryWeights<'a> {
    mask: &'a [u32],
    cursor: usize,
    weights: LossWeights,
}

impl EntryWeights<'_> {
    fn next(&mut self, j: u32) -> f64 {
        while self.cursor < self.mask.len() && self.mask[self.cursor] < j {
            self.cursor += 1;
        }
        if self.cursor < self.mask.len() && self.mask[self.cursor] == j {
            self.weights.alpha
        } else {
            self.weights.beta
        }
    }
}

/// Data part of the loss; when `grads` is given, also accumulates its
/// gradient. Only outputs at known entries of `x` are evaluated: every
/// other output carries zero error.
pub(crate) fn accumulate(
    params: &AutoencoderParams,
    x: &SparseVector,
    x_tilde: &SparseVector,
    mask: &CorruptionMask,
    side: &[f64],
    weights: LossWeights,
    mut grads: Option<(&mut Gradients, Option<&mut GradientTouch>)>,
) -> f64 {
    let k = params.k;
    let hidden = hidden_unchecked(params, x_tilde, side);
    let mut per_entry = EntryWeights {
        mask: mask.indices(),
        cursor: 0,
        weights,
    };
    let mut data_loss = 0.0;
    let mut d_hidden = vec![0.0; k];
    let mut touch_rows = Vec::new();

    for (&j, &target) in x.indices().iter().zip(x.values()) {
        let weight = per_entry.next(j);
        if weight == 0.0 {
            continue;
        }
        let j = j as usize;
        let out = output_preactivation(params, &hidden, side, j).tanh();
        let err = out - target;
        data_loss += weight * err * err;

        if let Some((g, _)) = grads.as_mut() {
            let delta = 2.0 * weight * err * (1.0 - out * out);
            let width = k + params.p_hidden;
            let row = &mut g.w2[j * width..(j + 1) * width];
            axpy(delta, &hidden, &mut row[..k]);
            if params.p_hidden > 0 {
                axpy(delta, side, &mut row[k..]);
            }
            g.b2[j] += delta;
            axpy(delta, &params.w2_row(j)[..k], &mut d_hidden);
            touch_rows.push(j);
        }
    }

    if let Some((g, touch)) = grads {
        // back through the hidden tanh
        for (d, h) in d_hidden.iter_mut().zip(&hidden) {
            *d *= 1.0 - h * h;
        }
        axpy(1.0, &d_hidden, &mut g.b1);
        for (j, v) in x_tilde.iter() {
            axpy(v, &d_hidden, &mut g.w1[j * k..(j + 1) * k]);
        }
        if params.p_in > 0 {
            for (s, &v) in side.iter().enumerate() {
                let c = params.n + s;
                axpy(v, &d_hidden, &mut g.w1[c * k..(c + 1) * k]);
            }
        }
        if let Some(touch) = touch {
            touch_rows.iter().for_each(|&j| touch.row(j));
            x_tilde
                .indices()
                .iter()
                .for_each(|&j| touch.col(j as usize));
            (params.n..params.n + params.p_in).for_each(|c| touch.col(c));
        }
    }
    data_loss
}

/// `α Σ_{K∩C} (nn(x̃)_j − x_j)² + β Σ_{K∖C} (nn(x̃)_j − x_j)² + λ ‖W‖²`,
/// with `K` the known entries of `x` and `C` the corrupted ones.
pub fn loss(
    params: &AutoencoderParams,
    x: &SparseVector,
    x_tilde: &SparseVector,
    mask: &CorruptionMask,
    side: Option<&[f64]>,
    weights: LossWeights,
) -> Result<f64> {
    let side = check_inputs(params, x_tilde, side)?;
    check_sample(x, x_tilde, mask)?;
    let data = accumulate(params, x, x_tilde, mask, side, weights, None);
    Ok(data + weights.lambda * params.weight_norm_sq())
}

/// Exact gradient of [`loss`] with respect to every parameter.
pub fn loss_gradients(
    params: &AutoencoderParams,
    x: &SparseVector,
    x_tilde: &SparseVector,
    mask: &CorruptionMask,
    side: Option<&[f64]>,
    weights: LossWeights,
) -> Result<Gradients> {
    loss_and_gradients(params, x, x_tilde, mask, side, weights).map(|(_, g)| g)
}

pub fn loss_and_gradients(
    params: &AutoencoderParams,
    x: &SparseVector,
    x_tilde: &SparseVector,
    mask: &CorruptionMask,
    side: Option<&[f64]>,
    weights: LossWeights,
) -> Result<(f64, Gradients)> {
    let side = check_inputs(params, x_tilde, side)?;
    check_sample(x, x_tilde, mask)?;
    let mut grads = Gradients::zeros_like(params);
    let data = accumulate(
        params,
        x,
        x_tilde,
        mask,
        side,
        weights,
        Some((&mut grads, None)),
    );
    grads.add_weight_decay(params, weights.lambda);
    Ok((data + weights.lambda * params.weight_norm_sq(), grads))
}
