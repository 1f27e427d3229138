//! Minibatch SGD over row or column vectors, matrix completion from a
//! trained network, and checkpoints.

mod checkpoint;
mod config;
mod predictor;
mod trainer;

pub use checkpoint::{
    load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION,
};
pub use config::{Orientation, SideInfoMode, TrainConfig};
pub use predictor::CfnPredictor;
pub use trainer::{build_samples, resume, train, CfnModel, EpochHook, EpochRecord, TrainState};
