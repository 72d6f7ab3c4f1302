//! Training objectives and the two optimizers used to minimize them.

mod loss;
mod optim;

pub use loss::{categorical_cross_entropy, cosine_proximity, hinge, mse, LossKind, PROB_FLOOR};
pub use optim::{Optimizer, OptimizerKind, RmsProp, SgdMomentum};
