use rayon::prelude::*;

use super::CfnModel;
use crate::data::{Axis, RatingSource};
use crate::error::{CfnError, Result};
use crate::eval::Predictor;
use crate::model::forward::{hidden_unchecked, output_preactivation};
use crate::model::SparseVector;
use crate::preprocess::SideInfoTable;

/// Completed rating matrix: the network is fed each entity's training
/// vector once, and a cell is read from the matching output unit.
///
/// Entities without training ratings fall back to their bias (the global
/// mean).
pub struct CfnPredictor<'a> {
    model: &'a CfnModel,
    side: Option<&'a SideInfoTable>,
    hidden: Vec<f64>,
    rated: Vec<bool>,
    n_users: usize,
    n_items: usize,
}

impl<'a> CfnPredictor<'a> {
    pub fn new<S: RatingSource + Sync + ?Sized>(
        model: &'a CfnModel,
        train: &S,
        side: Option<&'a SideInfoTable>,
    ) -> Result<Self> {
        let axis = model.orientation().axis();
        let n_entities = train.n_entities(axis);
        let n = train.n_entities(axis.other());
        let params = &model.params;
        if params.n() != n {
            return Err(CfnError::Dimension(format!(
                "network width {} but rating vectors of length {n}",
                params.n()
            )));
        }
        let side = if model.side_dim() > 0 {
            let table = side.ok_or_else(|| {
                CfnError::InvalidArgument("model was trained with side information".into())
            })?;
            if table.n_entities() != n_entities || table.dim() != model.side_dim() {
                return Err(CfnError::Dimension(format!(
                    "side table {}x{} does not match {n_entities} entities of width {}",
                    table.n_entities(),
                    table.dim(),
                    model.side_dim()
                )));
            }
            Some(table)
        } else {
            None
        };

        let k = params.k();
        let mut hidden = vec![0.0; n_entities * k];
        let rated: Vec<bool> = (0..n_entities)
            .map(|e| !train.vector(axis, e).is_empty())
            .collect();
        hidden
            .par_chunks_mut(k)
            .enumerate()
            .try_for_each(|(e, slot)| -> Result<()> {
                let known = train.vector(axis, e);
                if known.is_empty() {
                    return Ok(());
                }
                let entries = known
                    .iter()
                    .map(|&(j, r)| Ok((j, model.preprocessor.transform(r, e)?)))
                    .collect::<Result<Vec<_>>>()?;
                let x = SparseVector::new(n, entries)?;
                let row = side.map_or(&[][..], |t| t.row(e));
                slot.copy_from_slice(&hidden_unchecked(params, &x, row));
                Ok(())
            })?;
        Ok(CfnPredictor {
            model,
            side,
            hidden,
            rated,
            n_users: train.n_users(),
            n_items: train.n_items(),
        })
    }

    /// Network output in `[-1, 1]` for `(entity, index)` along the model's axis.
    fn raw_output(&self, entity: usize, index: usize) -> f64 {
        let k = self.model.params.k();
        let h = &self.hidden[entity * k..(entity + 1) * k];
        let side = self.side.map_or(&[][..], |t| t.row(entity));
        output_preactivation(&self.model.params, h, side, index).tanh()
    }

    pub fn has_training_ratings(&self, entity: usize) -> bool {
        self.rated.get(entity).copied().unwrap_or(false)
    }
}

impl Predictor for CfnPredictor<'_> {
    fn predict(&self, user: usize, item: usize) -> Result<f64> {
        if user >= self.n_users || item >= self.n_items {
            return Err(CfnError::OutOfRange(format!(
                "({user}, {item}) outside {}x{}",
                self.n_users, self.n_items
            )));
        }
        let (entity, index) = match self.model.orientation().axis() {
            Axis::User => (user, item),
            Axis::Item => (item, user),
        };
        let pre = &self.model.preprocessor;
        if !self.rated[entity] {
            return Ok(pre.scaler.scale.clamp(pre.bias.mean(entity)));
        }
        pre.inverse_transform(self.raw_output(entity, index), entity)
    }
}
