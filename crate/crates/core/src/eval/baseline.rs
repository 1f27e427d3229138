use super::Predictor;
use crate::data::{Axis, RatingMatrix, RatingScale};
use crate::error::{CfnError, Result};
use crate::preprocess::{fit_bias, BiasTable};

/// Predicts the centering mean of the user (or item), clamped to the scale.
#[derive(Debug, Clone)]
pub struct BiasBaseline {
    pub bias: BiasTable,
    pub scale: RatingScale,
}

pub fn bias_baseline(
    train: &RatingMatrix,
    orientation: Axis,
    scale: RatingScale,
) -> Result<BiasBaseline> {
    Ok(BiasBaseline {
        bias: fit_bias(train, orientation)?,
        scale,
    })
}

impl Predictor for BiasBaseline {
    fn predict(&self, user: usize, item: usize) -> Result<f64> {
        let entity = match self.bias.orientation {
            Axis::User => user,
            Axis::Item => item,
        };
        if entity >= self.bias.means.len() {
            return Err(CfnError::OutOfRange(format!("entity {entity}")));
        }
        Ok(self.scale.clamp(self.bias.mean(entity)))
    }
}
