//! From-scratch tensors, layers and training.
//!
//! Activations use NHWC layout for images and `[batch, features]` for flat
//! data. Arithmetic is always carried out in `f64`; [`Precision::F32`]
//! stores parameters rounded to `f32` after every update so that the
//! 32-bit checkpoint blob is lossless.

mod checkpoint;
mod gradcheck;
mod layers;
mod network;
mod tensor;
mod train;

pub use checkpoint::{Checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use gradcheck::gradient_check;
pub use layers::LayerSpec;
pub use network::{build_custom_cnn, build_dense_ann, cross_entropy, custom_cnn_specs, Network};
pub use tensor::Tensor;
pub use train::{
    evaluate, train, train_with_augmentation, Augmenter, Dataset, EpochRecord, OptimizerKind, TrainConfig,
    SGD_STABLE_LEARNING_RATE,
};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    #[default]
    F32,
    F64,
}

impl Precision {
    pub(crate) fn apply(self, values: &mut [f64]) {
        if self == Precision::F32 {
            values.iter_mut().for_each(|v| *v = *v as f32 as f64);
        }
    }
}

/// Probability floor inside the cross-entropy logarithm.
pub const LOG_CLAMP: f64 = 1e-12;
