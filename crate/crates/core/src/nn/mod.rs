//! Neural layers built on the autodiff graph.
//!
//! Each layer comes as a parameter struct (owning its tensors), a matching
//! `*Nodes` struct holding the graph handles after binding, and a free
//! function that records the forward computation. The parameter structs also
//! offer an eager `forward` that builds a throwaway graph.

mod dense;
mod dropout;
mod embedding;
mod gate;
mod lstm;

pub use dense::{dense, Activation, DenseNodes, DenseParams};
pub use dropout::{dropout, dropout_apply, dropout_mask, Mode};
pub use embedding::{embedding_lookup, EmbeddingParams, PADDING_INDEX};
pub use gate::{gate, GateKind, GateParams};
pub use lstm::{bilstm_encode, lstm_step, GateBlock, LstmNodes, LstmParams};

use crate::graph::{Graph, NodeId};
use crate::tensor::Tensor;

/// Registers `t` as a trainable parameter, or as a constant when frozen.
pub(crate) fn bind_tensor(g: &mut Graph, name: &str, t: &Tensor, trainable: bool) -> NodeId {
    if trainable {
        g.param(name, t.clone())
    } else {
        g.constant(t.clone())
    }
}

/// Uniform Glorot/Xavier bound for a `[fan_out × fan_in]` matrix.
pub(crate) fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
