//! A linear autoencoder as a reasoning system.
//!
//! Phenomena are data points from a low-rank Gaussian, explanations are
//! codes, `g` is the decoder and the adapter takes gradient steps on the
//! reconstruction loss. The architecture's bias lives in the code width `k`
//! and the weight norm bound `B`.

mod data;
mod model;
mod system;

pub use data::{DataDistribution, DataSpace, MIN_HOLDOUT};
pub use model::{Gradients, Init, LinearAutoencoder, MAX_INPUT_DIM};
pub use system::{
    neural_principles, Code, CodeSpace, NeuralConfig, NeuralPrinciples, NeuralSystem, NORM_BOUND_ID,
    WEIGHT_ENERGY_ID,
};

use crate::blocks::BlockError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NeuralError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("empty batch")]
    EmptyBatch,
    #[error("update produced non-finite weights")]
    NonFiniteUpdate,
    #[error("weight snapshot: {0}")]
    Format(#[from] BlockError),
}
