//! Model descriptions, parameter containers, builders for each model family,
//! the nearest-label decision rule and checkpoint files.

mod checkpoint;
mod decision;
mod network;
mod spec;

pub use checkpoint::{CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use decision::predict_nearest_label;
pub use network::{
    build_classical_image, build_combined_concat, build_combined_gated, build_embedding_head,
    build_text_bilstm, Forward, Model, ModelInput,
};
pub use spec::{
    BodySpec, FusionSpec, HeadSpec, HiddenLayer, InputDims, ModelSpec, DEFAULT_IMAGE_DIM, PRESETS,
    PROJECTION_DIM, TEXT_EMBED_DIM, TEXT_HIDDEN,
};
