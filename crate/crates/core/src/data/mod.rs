//! Dataset ingestion and preparation.

mod dataset;
mod features;
mod glove;
mod label;
mod split;

pub use dataset::{
    balance_classes, drop_neutral, filter_datapoints, filter_datapoints_with, label_datapoints,
    load_dataset, parse_dataset, Datapoint, MIN_TEXT_WORDS,
};
pub use features::{index_path_for, write_feature_file, FeatureStore, FEATURE_MAGIC};
pub use glove::{load_glove, parse_glove, EmbeddingTable};
pub use label::{label_from_anp_score, Sentiment, NEUTRAL_BAND};
pub use split::{batch_indices, batch_iter, split_dataset, Split, SplitConfig};
