use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::data::Axis;
use crate::error::{CfnError, Result};
use crate::model::LossWeights;

/// Which vectors the autoencoder reconstructs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Orientation {
    /// One input vector per user (rows), predicting the items they rate.
    #[serde(rename = "u_cfn")]
    UCfn,
    /// One input vector per item (columns), predicting the users rating it.
    #[serde(rename = "i_cfn")]
    ICfn,
}

impl Orientation {
    /// Axis the input vectors are drawn along.
    pub fn axis(self) -> Axis {
        match self {
            Orientation::UCfn => Axis::User,
            Orientation::ICfn => Axis::Item,
        }
    }
}

impl fmt::Display for Orientation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Orientation::UCfn => "u_cfn",
            Orientation::ICfn => "i_cfn",
        })
    }
}

impl FromStr for Orientation {
    type Err = CfnError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u" | "u_cfn" | "u-cfn" | "user" => Ok(Orientation::UCfn),
            "i" | "i_cfn" | "i-cfn" | "item" => Ok(Orientation::ICfn),
            other => Err(CfnError::InvalidArgument(format!(
                "unknown orientation '{other}'"
            ))),
        }
    }
}

/// Where side information enters the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideInfoMode {
    None,
    InputOnly,
    HiddenOnly,
    Both,
}

impl SideInfoMode {
    pub fn feeds_input(self) -> bool {
        matches!(self, SideInfoMode::InputOnly | SideInfoMode::Both)
    }

    pub fn feeds_hidden(self) -> bool {
        matches!(self, SideInfoMode::HiddenOnly | SideInfoMode::Both)
    }
}

impl fmt::Display for SideInfoMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SideInfoMode::None => "none",
            SideInfoMode::InputOnly => "input_only",
            SideInfoMode::HiddenOnly => "hidden_only",
            SideInfoMode::Both => "both",
        })
    }
}

impl FromStr for SideInfoMode {
    type Err = CfnError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SideInfoMode::None),
            "input" | "input_only" => Ok(SideInfoMode::InputOnly),
            "hidden" | "hidden_only" => Ok(SideInfoMode::HiddenOnly),
            "both" => Ok(SideInfoMode::Both),
            other => Err(CfnError::InvalidArgument(format!(
                "unknown side-info mode '{other}'"
            ))),
        }
    }
}

/// Hyperparameters of a training run. [`Default`] gives the published
/// settings for I-CFN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub orientation: Orientation,
    pub hidden: usize,
    pub alpha: f64,
    pub beta: f64,
    pub mask_ratio: f64,
    /// Weight-decay setting; the effective `λ` is `weight_decay / n_input`
    /// unless `lambda` overrides it.
    pub weight_decay: f64,
    /// Explicit `λ` for the `‖W‖²` term.
    pub lambda: Option<f64>,
    pub lr0: f64,
    /// Epoch `e` (from 0) uses `lr0 / (1 + lr_decay · e)`.
    pub lr_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub side_info: SideInfoMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            orientation: Orientation::ICfn,
            hidden: 600,
            alpha: 1.0,
            beta: 0.5,
            mask_ratio: 0.25,
            weight_decay: 0.5,
            lambda: None,
            lr0: 0.7,
            lr_decay: 0.3,
            epochs: 20,
            batch_size: 32,
            seed: 0,
            side_info: SideInfoMode::None,
        }
    }
}

impl TrainConfig {
    pub fn with_orientation(orientation: Orientation) -> Self {
        TrainConfig {
            orientation,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(CfnError::InvalidArgument(m));
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return fail(format!("lr0 must be positive, got {}", self.lr0));
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return fail(format!(
                "lr_decay must be non-negative, got {}",
                self.lr_decay
            ));
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if self.batch_size == 0 || self.hidden == 0 {
            return fail("batch_size and hidden must be at least 1".into());
        }
        if !(0.0..1.0).contains(&self.mask_ratio) {
            return fail(format!(
                "mask_ratio must lie in [0, 1), got {}",
                self.mask_ratio
            ));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return fail(format!(
                "weight_decay must be non-negative, got {}",
                self.weight_decay
            ));
        }
        LossWeights::new(self.alpha, self.beta, self.lambda.unwrap_or(0.0))?;
        Ok(())
    }

    pub fn effective_lambda(&self, n_input: usize) -> f64 {
        self.lambda
            .unwrap_or(self.weight_decay / n_input.max(1) as f64)
    }

    pub fn loss_weights(&self, n_input: usize) -> Result<LossWeights> {
        LossWeights::new(self.alpha, self.beta, self.effective_lambda(n_input))
    }

    pub fn learning_rate(&self, epoch: usize) -> f64 {
        self.lr0 / (1.0 + self.lr_decay * epoch as f64)
    }

    /// Short stable fingerprint of every field.
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json)[..8]
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}
