use serde::{Deserialize, Serialize};

use crate::data::Sentiment;
use crate::error::{Error, Result};
use crate::nn::{Activation, GateKind};

pub const DEFAULT_IMAGE_DIM: usize = 4096;
pub const TEXT_EMBED_DIM: usize = 200;
pub const TEXT_HIDDEN: usize = 300;
/// Width of the label-embedding space used by projection heads.
pub const PROJECTION_DIM: usize = 50;

/// Declarative description of a model: class set, body and head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub classes: Vec<Sentiment>,
    pub body: BodySpec,
    pub head: HeadSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BodySpec {
    /// Dense stack over a precomputed feature vector.
    FeedForward {
        input_dim: usize,
        layers: Vec<HiddenLayer>,
    },
    /// Token embedding followed by a bidirectional LSTM over the encoded
    /// sequence; features are both final hidden states concatenated.
    TextBilstm {
        vocab_size: usize,
        embed_dim: usize,
        hidden: usize,
    },
    /// Combination of precomputed text and image features.
    Fusion(FusionSpec),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HiddenLayer {
    pub units: usize,
    pub activation: Activation,
    /// Dropout rate applied after the layer; 0 disables it.
    #[serde(default)]
    pub dropout: f64,
}

impl HiddenLayer {
    pub fn relu(units: usize, dropout: f64) -> Self {
        HiddenLayer {
            units,
            activation: Activation::Relu,
            dropout,
        }
    }
}

/// `text → text_gate`, `image → image_compress → image_gate`, concatenated,
/// then dropout. Absent gates pass their branch through unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionSpec {
    pub text_dim: usize,
    pub image_dim: usize,
    pub text_gate: Option<GateKind>,
    pub image_gate: Option<GateKind>,
    /// Width of a ReLU dense layer applied to the image branch.
    pub image_compress: Option<usize>,
    #[serde(default)]
    pub dropout: f64,
}

impl FusionSpec {
    /// Plain concatenation: no gates, no compression, no dropout.
    pub fn concat(text_dim: usize, image_dim: usize) -> Self {
        FusionSpec {
            text_dim,
            image_dim,
            text_gate: None,
            image_gate: None,
            image_compress: None,
            dropout: 0.0,
        }
    }

    pub fn image_out_dim(&self) -> usize {
        self.image_compress.unwrap_or(self.image_dim)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HeadSpec {
    /// Dense softmax over the classes.
    Softmax,
    /// Linear map into a label-embedding space.
    Projection { dim: usize },
}

fn check_rate(what: &str, rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Spec(format!(
            "{what} dropout rate {rate} is outside [0, 1)"
        )))
    }
}

fn check_positive(what: &str, n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Spec(format!("{what} must be positive")));
    }
    Ok(())
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.classes.len() < 2 || self.classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Spec(format!(
                "classes must be at least two distinct labels in negative < neutral < positive order, got {:?}",
                self.classes
            )));
        }
        match &self.body {
            BodySpec::FeedForward { input_dim, layers } => {
                check_positive("input dimension", *input_dim)?;
                for (i, l) in layers.iter().enumerate() {
                    check_positive(&format!("layer {i} width"), l.units)?;
                    check_rate(&format!("layer {i}"), l.dropout)?;
                    if l.activation == Activation::Softmax {
                        return Err(Error::Spec(format!("hidden layer {i} cannot use softmax")));
                    }
                }
            }
            BodySpec::TextBilstm {
                vocab_size,
                embed_dim,
                hidden,
            } => {
                if *vocab_size < 2 {
                    return Err(Error::Spec(format!(
                        "vocabulary size {vocab_size} leaves no room for real tokens"
                    )));
                }
                check_positive("embedding width", *embed_dim)?;
                check_positive("LSTM hidden size", *hidden)?;
            }
            BodySpec::Fusion(f) => {
                check_positive("text feature dimension", f.text_dim)?;
                check_positive("image feature dimension", f.image_dim)?;
                if let Some(c) = f.image_compress {
                    check_positive("image compression width", c)?;
                }
                check_rate("fusion", f.dropout)?;
            }
        }
        if let HeadSpec::Projection { dim } = self.head {
            check_positive("projection dimension", dim)?;
        }
        Ok(())
    }

    /// Width of the vector the head consumes.
    pub fn penultimate_dim(&self) -> usize {
        match &self.body {
            BodySpec::FeedForward { input_dim, layers } => {
                layers.last().map_or(*input_dim, |l| l.units)
            }
            BodySpec::TextBilstm { hidden, .. } => 2 * hidden,
            BodySpec::Fusion(f) => f.text_dim + f.image_out_dim(),
        }
    }

    pub fn output_dim(&self) -> usize {
        match self.head {
            HeadSpec::Softmax => self.classes.len(),
            HeadSpec::Projection { dim } => dim,
        }
    }

    /// Named architecture. `image_dim`, `text_dim` and `vocab_size` fill in
    /// whichever input widths the preset needs.
    pub fn preset(name: &str, dims: InputDims, two_class: bool) -> Result<Self> {
        let classes = Sentiment::classes(two_class);
        let ff = |layers: Vec<HiddenLayer>| BodySpec::FeedForward {
            input_dim: dims.image,
            layers,
        };
        let (body, head) = match name {
            "image-3class" => (
                ff(vec![
                    HiddenLayer::relu(1024, 0.5),
                    HiddenLayer::relu(512, 0.5),
                ]),
                HeadSpec::Softmax,
            ),
            "image-2class" => (
                ff(vec![
                    HiddenLayer::relu(2048, 0.7),
                    HiddenLayer::relu(1024, 0.7),
                    HiddenLayer::relu(512, 0.5),
                ]),
                HeadSpec::Softmax,
            ),
            "image-embedding" => (
                ff(vec![HiddenLayer::relu(512, 0.2)]),
                HeadSpec::Projection {
                    dim: PROJECTION_DIM,
                },
            ),
            "text-bilstm" => (
                BodySpec::TextBilstm {
                    vocab_size: dims.vocab,
                    embed_dim: TEXT_EMBED_DIM,
                    hidden: TEXT_HIDDEN,
                },
                HeadSpec::Softmax,
            ),
            "fusion-concat" => (
                BodySpec::Fusion(FusionSpec::concat(dims.text, dims.image)),
                HeadSpec::Softmax,
            ),
            "fusion-gated" => (
                BodySpec::Fusion(FusionSpec {
                    text_gate: Some(GateKind::GL1),
                    image_gate: Some(GateKind::GL2),
                    image_compress: Some(2 * TEXT_HIDDEN),
                    dropout: 0.3,
                    ..FusionSpec::concat(dims.text, dims.image)
                }),
                HeadSpec::Softmax,
            ),
            "fusion-gated-retained" => (
                BodySpec::Fusion(FusionSpec {
                    text_gate: Some(GateKind::GL2),
                    image_gate: Some(GateKind::GL2),
                    dropout: 0.3,
                    ..FusionSpec::concat(dims.text, dims.image)
                }),
                HeadSpec::Softmax,
            ),
            other => {
                return Err(Error::Spec(format!(
                    "unknown architecture '{other}' (known: {})",
                    PRESETS.join(", ")
                )))
            }
        };
        let spec = ModelSpec {
            classes,
            body,
            head,
        };
        spec.validate()?;
        Ok(spec)
    }
}

pub const PRESETS: [&str; 7] = [
    "image-3class",
    "image-2class",
    "image-embedding",
    "text-bilstm",
    "fusion-concat",
    "fusion-gated",
    "fusion-gated-retained",
];

/// Input widths used to instantiate presets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct InputDims {
    pub image: usize,
    pub text: usize,
    pub vocab: usize,
}

impl Default for InputDims {
    fn default() -> Self {
        InputDims {
            image: DEFAULT_IMAGE_DIM,
            text: 2 * TEXT_HIDDEN,
            vocab: 2,
        }
    }
}
