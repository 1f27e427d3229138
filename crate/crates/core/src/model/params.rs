use rand::distributions::{Distribution, Uniform};
use rand::Rng;

use crate::error::{CfnError, Result};

/// Weights and biases of a one-hidden-layer autoencoder with optional side
/// information appended to the input (`p_in` columns of `W1`) and to the
/// hidden layer (`p_hidden` columns of `W2`).
///
/// `W1` (`k × (n + p_in)`) is stored column by column so that the columns of
/// known inputs are contiguous; `W2` (`n × (k + p_hidden)`) is stored row by
/// row so that the rows of observed outputs are contiguous.
#[derive(Debug, Clone, PartialEq)]
pub struct AutoencoderParams {
    pub(crate) n: usize,
    pub(crate) k: usize,
    pub(crate) p_in: usize,
    pub(crate) p_hidden: usize,
    pub(crate) w1: Vec<f64>,
    pub(crate) b1: Vec<f64>,
    pub(crate) w2: Vec<f64>,
    pub(crate) b2: Vec<f64>,
}

impl AutoencoderParams {
    /// All-zero parameters.
    pub fn zeros(n: usize, k: usize, p_in: usize, p_hidden: usize) -> Result<Self> {
        if n == 0 || k == 0 {
            return Err(CfnError::InvalidArgument(format!(
                "autoencoder needs n, k >= 1 (got n={n}, k={k})"
            )));
        }
        if p_in > 0 && p_hidden > 0 && p_in != p_hidden {
            return Err(CfnError::Dimension(format!(
                "one side vector feeds both layers, but p_in={p_in} and p_hidden={p_hidden}"
            )));
        }
        Ok(AutoencoderParams {
            n,
            k,
            p_in,
            p_hidden,
            w1: vec![0.0; k * (n + p_in)],
            b1: vec![0.0; k],
            w2: vec![0.0; n * (k + p_hidden)],
            b2: vec![0.0; n],
        })
    }

    /// Weights uniform on `[-1/√fan_in, 1/√fan_in]`, biases zero.
    pub fn init<R: Rng + ?Sized>(
        n: usize,
        k: usize,
        p_in: usize,
        p_hidden: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut params = Self::zeros(n, k, p_in, p_hidden)?;
        let bound1 = 1.0 / ((n + p_in) as f64).sqrt();
        let law1 = Uniform::new_inclusive(-bound1, bound1);
        params.w1.iter_mut().for_each(|w| *w = law1.sample(rng));
        let bound2 = 1.0 / ((k + p_hidden) as f64).sqrt();
        let law2 = Uniform::new_inclusive(-bound2, bound2);
        params.w2.iter_mut().for_each(|w| *w = law2.sample(rng));
        Ok(params)
    }

    /// Input and output width.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Hidden width.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p_in(&self) -> usize {
        self.p_in
    }

    pub fn p_hidden(&self) -> usize {
        self.p_hidden
    }

    /// Width of the side vector expected by `forward`, 0 when disabled.
    pub fn side_dim(&self) -> usize {
        self.p_in.max(self.p_hidden)
    }

    pub fn w1(&self, hidden: usize, input: usize) -> f64 {
        self.w1[input * self.k + hidden]
    }

    pub fn w1_mut(&mut self, hidden: usize, input: usize) -> &mut f64 {
        &mut self.w1[input * self.k + hidden]
    }

    pub fn w2(&self, output: usize, hidden: usize) -> f64 {
        self.w2[output * (self.k + self.p_hidden) + hidden]
    }

    pub fn w2_mut(&mut self, output: usize, hidden: usize) -> &mut f64 {
        &mut self.w2[output * (self.k + self.p_hidden) + hidden]
    }

    pub fn b1(&self) -> &[f64] {
        &self.b1
    }

    pub fn b1_mut(&mut self) -> &mut [f64] {
        &mut self.b1
    }

    pub fn b2(&self) -> &[f64] {
        &self.b2
    }

    pub fn b2_mut(&mut self) -> &mut [f64] {
        &mut self.b2
    }

    /// Incoming weights of input unit `input` (length `k`).
    pub fn w1_column(&self, input: usize) -> &[f64] {
        &self.w1[input * self.k..(input + 1) * self.k]
    }

    /// Incoming weights of output unit `output` (length `k + p_hidden`).
    pub fn w2_row(&self, output: usize) -> &[f64] {
        let width = self.k + self.p_hidden;
        &self.w2[output * width..(output + 1) * width]
    }

    /// Flat storage of `W1` (column-major) and `W2` (row-major).
    pub fn weights(&self) -> (&[f64], &[f64]) {
        (&self.w1, &self.w2)
    }

    /// Squared Frobenius norm of both weight matrices; biases excluded.
    pub fn weight_norm_sq(&self) -> f64 {
        self.w1.iter().chain(&self.w2).map(|w| w * w).sum()
    }

    pub fn n_parameters(&self) -> usize {
        self.w1.len() + self.b1.len() + self.w2.len() + self.b2.len()
    }

    pub fn is_finite(&self) -> bool {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .all(|v| v.is_finite())
    }

    /// Rebuilds parameters from flat arrays laid out as in [`AutoencoderParams::weights`].
    pub fn from_parts(
        (n, k, p_in, p_hidden): (usize, usize, usize, usize),
        w1: Vec<f64>,
        b1: Vec<f64>,
        w2: Vec<f64>,
        b2: Vec<f64>,
    ) -> Result<Self> {
        let shape = Self::zeros(n, k, p_in, p_hidden)?;
        if w1.len() != shape.w1.len()
            || b1.len() != k
            || w2.len() != shape.w2.len()
            || b2.len() != n
        {
            return Err(CfnError::Dimension(format!(
                "parameter arrays do not match n={n}, k={k}, p_in={p_in}, p_hidden={p_hidden}"
            )));
        }
        let params = AutoencoderParams {
            w1,
            b1,
            w2,
            b2,
            ..shape
        };
        if !params.is_finite() {
            return Err(CfnError::NonFinite("autoencoder parameters".into()));
        }
        Ok(params)
    }
}
