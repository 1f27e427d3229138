use crate::data::RatingMatrix;
use crate::error::{CfnError, Result};

/// Anything that can fill in a cell of the rating matrix.
pub trait Predictor {
    fn predict(&self, user: usize, item: usize) -> Result<f64>;
}

impl<P: Predictor + ?Sized> Predictor for &P {
    fn predict(&self, user: usize, item: usize) -> Result<f64> {
        (**self).predict(user, item)
    }
}

/// Adapts a closure into a [`Predictor`].
pub struct FnPredictor<F>(pub F);

impl<F: Fn(usize, usize) -> f64> Predictor for FnPredictor<F> {
    fn predict(&self, user: usize, item: usize) -> Result<f64> {
        Ok((self.0)(user, item))
    }
}

/// Root mean squared error over exactly the entries of `test`.
pub fn rmse<P: Predictor + ?Sized>(predictor: &P, test: &RatingMatrix) -> Result<f64> {
    if test.is_empty() {
        return Err(CfnError::InvalidArgument("empty test set".into()));
    }
    let mut sum = 0.0;
    for r in test.entries() {
        let err = predictor.predict(r.user as usize, r.item as usize)? - r.value;
        sum += err * err;
    }
    Ok((sum / test.len() as f64).sqrt())
}
