//! The conditional DDF predictor: positional encoding, residual multi-head cross-attention over
//! the 2D features, an 8-layer MLP with a visibility head after layer 3 and a skip of the ray
//! encoding into layer 4, the three-term loss with hand-written reverse-mode gradients, Adam and
//! the training loop.

mod adam;
mod attention;
mod encoding;
mod features;
mod gradcheck;
mod loss;
mod network;
mod tensor;
mod train;

#[cfg(test)]
pub(crate) mod test_util;

pub use adam::AdamState;
pub use attention::{aggregate_2d, AttentionBlock};
pub use encoding::{encoded_len, positional_encode};
pub use features::FeaturePipeline;
pub use gradcheck::{gradcheck, GradcheckReport, GRADCHECK_FLOOR};
pub use loss::{loss, softplus, sigmoid, LossBreakdown, Target, BCE_CLAMP};
pub use network::{DdfNetwork, NetConfig, Prediction, RayInput};
pub use tensor::Tensor;
pub use train::{train, EpochLog, PairExample, TrainConfig, TrainingExample};
