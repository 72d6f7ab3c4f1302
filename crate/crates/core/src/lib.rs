//! Image and text sentiment classification.
//!
//! The crate is organized bottom-up:
//!
//! - [`tensor`] and [`graph`]: dense `f64` arrays and define-by-run
//!   reverse-mode differentiation, checked by [`gradcheck`].
//! - [`nn`]: dense, dropout, embedding, LSTM/BiLSTM and the two elementwise
//!   gating layers.
//! - [`objectives`]: cross-entropy, cosine proximity, hinge and MSE losses;
//!   SGD with momentum and RMSProp.
//! - [`data`] and [`text`]: dataset ingestion, score-based labeling,
//!   splitting, GloVe loading, tokenization and vocabulary encoding.
//! - [`model`]: declarative model specs, presets, checkpoints and the
//!   nearest-label decision rule for embedding heads.
//! - [`train`], [`metrics`], [`projection`]: the training loop, accuracy
//!   metrics and 2-D PCA projection for plotting.

pub mod data;
pub mod error;
pub mod gradcheck;
pub mod graph;
pub mod metrics;
pub mod model;
pub mod nn;
pub mod objectives;
pub mod params;
pub mod projection;
pub mod tensor;
pub mod text;
pub mod train;

pub use error::{Error, Result};
pub use graph::{Gradients, Graph, NodeId, OpKind};
pub use params::ParamSet;
pub use tensor::Tensor;
