//! Collaborative filtering networks: denoising autoencoders trained on
//! incomplete rating vectors, with optional side information.

pub mod data;
pub mod error;
pub mod eval;
pub mod model;
pub mod preprocess;
pub mod synth;
pub mod train;

pub use error::{CfnError, Result};
