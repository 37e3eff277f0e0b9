//! Classifiers over eigenspace coordinates: a five-layer tanh network trained
//! by full-batch gradient descent with momentum, and the nearest class-mean
//! rule.

mod mindist;
mod mlp;

pub use mindist::{fit_min_distance, MinDistModel};
pub use mlp::{
    mlp_train, momentum_step, Activation, Batch, Forward, Gradient, Layer, MlpConfig, MlpModel, TrainingLog,
    TARGET_OFF, TARGET_ON,
};
