//! The autoencoder: parameters, forward pass with side-information
//! injection, input corruption, and the masked denoising loss with its
//! exact gradient.

pub(crate) mod forward;
pub(crate) mod loss;
mod params;
mod sparse;

pub use forward::{decompose, forward, hidden_activation};
pub use loss::{loss, loss_and_gradients, loss_gradients, GradientTouch, Gradients, LossWeights};
pub use params::AutoencoderParams;
pub use sparse::{corrupt, CorruptionMask, SparseVector};
