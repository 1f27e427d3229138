use serde::{Deserialize, Serialize};

use super::BiasTable;
use crate::data::RatingScale;
use crate::error::{CfnError, Result};

/// Affine map from centered ratings onto the tanh output range.
///
/// `[centered_low, centered_high]` is sent to `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub scale: RatingScale,
    pub centered_low: f64,
    pub centered_high: f64,
}

impl Scaler {
    pub fn new(scale: RatingScale, centered_low: f64, centered_high: f64) -> Result<Self> {
        if !(centered_low.is_finite() && centered_high.is_finite() && centered_low < centered_high)
        {
            return Err(CfnError::InvalidArgument(format!(
                "centered range [{centered_low}, {centered_high}] is empty"
            )));
        }
        Ok(Scaler {
            scale,
            centered_low,
            centered_high,
        })
    }

    /// Symmetric range `[-h, h]` with `h = max(|min_rating - max_mean|,
    /// |max_rating - min_mean|)`: every centered training value fits, and a
    /// rating equal to its entity mean maps to exactly 0.
    pub fn fit(scale: RatingScale, bias: &BiasTable) -> Result<Self> {
        let (lo_mean, hi_mean) = bias
            .means
            .iter()
            .chain(std::iter::once(&bias.global_mean))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
                (lo.min(m), hi.max(m))
            });
        let half = (scale.min_rating - hi_mean)
            .abs()
            .max((scale.max_rating - lo_mean).abs());
        Scaler::new(scale, -half, half)
    }

    fn width(&self) -> f64 {
        self.centered_high - self.centered_low
    }

    pub fn forward(&self, centered: f64) -> f64 {
        2.0 * (centered - self.centered_low) / self.width() - 1.0
    }

    pub fn backward(&self, scaled: f64) -> f64 {
        (scaled + 1.0) * self.width() / 2.0 + self.centered_low
    }
}

/// Bias table and scaler fitted together on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub bias: BiasTable,
    pub scaler: Scaler,
}

impl Preprocessor {
    pub fn fit(
        train: &crate::data::RatingMatrix,
        scale: RatingScale,
        orientation: crate::data::Axis,
    ) -> Result<Self> {
        let bias = super::fit_bias(train, orientation)?;
        let scaler = Scaler::fit(scale, &bias)?;
        Ok(Preprocessor { bias, scaler })
    }

    /// Rating → network target in `[-1, 1]`.
    pub fn transform(&self, rating: f64, entity: usize) -> Result<f64> {
        if !rating.is_finite() {
            return Err(CfnError::NonFinite(format!("rating {rating}")));
        }
        Ok(self.scaler.forward(rating - self.bias.mean(entity)))
    }

    /// Exact inverse of [`Preprocessor::transform`], without clamping.
    pub fn inverse_transform_unclamped(&self, scaled: f64, entity: usize) -> Result<f64> {
        if !scaled.is_finite() {
            return Err(CfnError::NonFinite(format!("network output {scaled}")));
        }
        Ok(self.scaler.backward(scaled) + self.bias.mean(entity))
    }

    /// Network output → rating, clamped to the rating scale.
    pub fn inverse_transform(&self, scaled: f64, entity: usize) -> Result<f64> {
        self.inverse_transform_unclamped(scaled, entity)
            .map(|r| self.scaler.scale.clamp(r))
    }
}
