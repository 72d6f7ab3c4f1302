use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::decision::predict_nearest_label;
use super::spec::{BodySpec, FusionSpec, HeadSpec, ModelSpec};
use crate::data::{EmbeddingTable, Sentiment};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::nn::{self, Activation, DenseParams, EmbeddingParams, GateParams, LstmParams, Mode};
use crate::params::ParamSet;
use crate::tensor::Tensor;
use crate::text::{EncodedSequence, MAX_LEN};

/// What a model consumes: a `[B × d]` feature matrix, a batch of encoded
/// sequences, or a text/image feature pair.
#[derive(Clone, Copy, Debug)]
pub enum ModelInput<'a> {
    Features(&'a Tensor),
    Tokens(&'a [EncodedSequence]),
    Dual { text: &'a Tensor, image: &'a Tensor },
}

impl ModelInput<'_> {
    pub fn batch_size(&self) -> usize {
        match self {
            ModelInput::Features(t) | ModelInput::Dual { text: t, .. } => t.as_matrix_dims().0,
            ModelInput::Tokens(s) => s.len(),
        }
    }
}

// one per model, so variant size does not matter
#[allow(clippy::large_enum_variant)]
#[derive(Clone, Debug, PartialEq)]
enum Body {
    FeedForward(Vec<(DenseParams, f64)>),
    Text {
        embedding: EmbeddingParams,
        fwd: LstmParams,
        bwd: LstmParams,
    },
    Fusion {
        spec: FusionSpec,
        text_gate: Option<GateParams>,
        compress: Option<DenseParams>,
        image_gate: Option<GateParams>,
    },
}

/// Graph handles from one forward pass.
#[derive(Clone, Copy, Debug)]
pub struct Forward {
    /// Input to the head.
    pub features: NodeId,
    pub output: NodeId,
}

/// Parameters for a [`ModelSpec`], plus label vectors when the head projects
/// into an embedding space.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    spec: ModelSpec,
    body: Body,
    head: DenseParams,
    labels: Option<EmbeddingTable>,
}

const HEAD: &str = "head";

impl Model {
    /// Fresh parameters for `spec`.
    pub fn init<R: Rng + ?Sized>(spec: ModelSpec, rng: &mut R) -> Result<Self> {
        spec.validate()?;
        let body = match &spec.body {
            BodySpec::FeedForward { input_dim, layers } => {
                let mut width = *input_dim;
                let mut stack = Vec::with_capacity(layers.len());
                for l in layers {
                    stack.push((
                        DenseParams::init(width, l.units, l.activation, rng)?,
                        l.dropout,
                    ));
                    width = l.units;
                }
                Body::FeedForward(stack)
            }
            BodySpec::TextBilstm {
                vocab_size,
                embed_dim,
                hidden,
            } => Body::Text {
                embedding: EmbeddingParams::init(*vocab_size, *embed_dim, rng)?,
                fwd: LstmParams::init(*embed_dim, *hidden, rng)?,
                bwd: LstmParams::init(*embed_dim, *hidden, rng)?,
            },
            BodySpec::Fusion(f) => {
                let compress = f
                    .image_compress
                    .map(|c| DenseParams::init(f.image_dim, c, Activation::Relu, rng))
                    .transpose()?;
                Body::Fusion {
                    spec: *f,
                    text_gate: f
                        .text_gate
                        .map(|k| GateParams::init(k, f.text_dim))
                        .transpose()?,
                    compress,
                    image_gate: f
                        .image_gate
                        .map(|k| GateParams::init(k, f.image_out_dim()))
                        .transpose()?,
                }
            }
        };
        let head = Self::init_head(&spec, rng)?;
        Ok(Model {
            spec,
            body,
            head,
            labels: None,
        })
    }

    fn init_head<R: Rng + ?Sized>(spec: &ModelSpec, rng: &mut R) -> Result<DenseParams> {
        let act = match spec.head {
            HeadSpec::Softmax => Activation::Softmax,
            HeadSpec::Projection { .. } => Activation::Linear,
        };
        DenseParams::init(spec.penultimate_dim(), spec.output_dim(), act, rng)
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn classes(&self) -> &[Sentiment] {
        &self.spec.classes
    }

    pub fn head(&self) -> &DenseParams {
        &self.head
    }

    pub fn head_mut(&mut self) -> &mut DenseParams {
        &mut self.head
    }

    pub fn label_embeddings(&self) -> Option<&EmbeddingTable> {
        self.labels.as_ref()
    }

    /// Attaches class-word vectors from `table` for nearest-label decisions.
    /// Only the model's own classes are kept.
    pub fn set_label_embeddings(&mut self, table: &EmbeddingTable) -> Result<()> {
        let HeadSpec::Projection { dim } = self.spec.head else {
            return Err(Error::Spec(
                "label embeddings need a projection head".into(),
            ));
        };
        if table.dim() != dim {
            return Err(Error::Spec(format!(
                "label vectors have {} dimensions but the head projects to {dim}",
                table.dim()
            )));
        }
        let mut own = EmbeddingTable::new(dim);
        for c in &self.spec.classes {
            own.insert(c.word(), table.get(c.word())?.clone())?;
        }
        self.labels = Some(own);
        Ok(())
    }

    /// Replaces the head with a linear projection to `dim`, keeping every
    /// body parameter as is.
    pub fn with_projection_head<R: Rng + ?Sized>(
        &self,
        dim: usize,
        labels: &EmbeddingTable,
        rng: &mut R,
    ) -> Result<Self> {
        if self.spec.head != HeadSpec::Softmax {
            return Err(Error::Spec("model has no softmax head to replace".into()));
        }
        let mut spec = self.spec.clone();
        spec.head = HeadSpec::Projection { dim };
        spec.validate()?;
        let mut out = Model {
            head: Self::init_head(&spec, rng)?,
            spec,
            body: self.body.clone(),
            labels: None,
        };
        out.set_label_embeddings(labels)?;
        Ok(out)
    }

    /// Visits every parameter as `(name, tensor)` in a fixed order.
    pub fn visit<'a>(&'a self, f: &mut dyn FnMut(String, &'a Tensor)) {
        match &self.body {
            Body::FeedForward(stack) => {
                for (i, (d, _)) in stack.iter().enumerate() {
                    d.visit(&format!("layer{i}"), f);
                }
            }
            Body::Text {
                embedding,
                fwd,
                bwd,
            } => {
                embedding.visit("embedding", f);
                fwd.visit("bilstm.fwd", f);
                bwd.visit("bilstm.bwd", f);
            }
            Body::Fusion {
                text_gate,
                compress,
                image_gate,
                ..
            } => {
                if let Some(gp) = text_gate {
                    gp.visit("fusion.text_gate", f);
                }
                if let Some(d) = compress {
                    d.visit("fusion.image_compress", f);
                }
                if let Some(gp) = image_gate {
                    gp.visit("fusion.image_gate", f);
                }
            }
        }
        self.head.visit(HEAD, f);
    }

    pub fn visit_mut<'a>(&'a mut self, f: &mut dyn FnMut(String, &'a mut Tensor)) {
        match &mut self.body {
            Body::FeedForward(stack) => {
                for (i, (d, _)) in stack.iter_mut().enumerate() {
                    d.visit_mut(&format!("layer{i}"), f);
                }
            }
            Body::Text {
                embedding,
                fwd,
                bwd,
            } => {
                embedding.visit_mut("embedding", f);
                fwd.visit_mut("bilstm.fwd", f);
                bwd.visit_mut("bilstm.bwd", f);
            }
            Body::Fusion {
                text_gate,
                compress,
                image_gate,
                ..
            } => {
                if let Some(gp) = text_gate {
                    gp.visit_mut("fusion.text_gate", f);
                }
                if let Some(d) = compress {
                    d.visit_mut("fusion.image_compress", f);
                }
                if let Some(gp) = image_gate {
                    gp.visit_mut("fusion.image_gate", f);
                }
            }
        }
        self.head.visit_mut(HEAD, f);
    }

    pub fn params(&self) -> ParamSet {
        let mut p = ParamSet::new();
        self.visit(&mut |n, t| p.insert(n, t.clone()));
        p
    }

    /// Mutable handles to every parameter, for the optimizer.
    pub fn params_mut(&mut self) -> Vec<(String, &mut Tensor)> {
        let mut out = Vec::new();
        self.visit_mut(&mut |n, t| out.push((n, t)));
        out
    }

    /// Overwrites parameters by name. Every parameter must be present with
    /// its current shape.
    pub fn load_params(&mut self, params: &ParamSet) -> Result<()> {
        let mut failure = None;
        self.visit_mut(&mut |n, t| {
            if failure.is_some() {
                return;
            }
            match params.get(&n) {
                Ok(v) if v.shape() == t.shape() => *t = v.clone(),
                Ok(v) => {
                    failure = Some(Error::Spec(format!(
                        "parameter {n} has shape {:?}, expected {:?}",
                        v.shape(),
                        t.shape()
                    )))
                }
                Err(e) => failure = Some(e),
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Records a forward pass. Parameters are registered under their names
    /// when `trainable`, as constants otherwise. `rng` drives dropout masks
    /// in [`Mode::Train`].
    pub fn forward<R: Rng + ?Sized>(
        &self,
        g: &mut Graph,
        input: &ModelInput,
        mode: Mode,
        trainable: bool,
        rng: &mut R,
    ) -> Result<Forward> {
        let features = match (&self.body, input) {
            (Body::FeedForward(stack), ModelInput::Features(x)) => {
                let mut h = g.constant((*x).clone());
                for (i, (d, rate)) in stack.iter().enumerate() {
                    let nodes = d.bind(g, &format!("layer{i}"), trainable);
                    h = nn::dense(g, &nodes, h)?;
                    if *rate > 0.0 {
                        h = nn::dropout(g, h, *rate, mode, rng)?;
                    }
                }
                h
            }
            (
                Body::Text {
                    embedding,
                    fwd,
                    bwd,
                },
                ModelInput::Tokens(seqs),
            ) => {
                if seqs.is_empty() {
                    return Err(Error::Contract("empty token batch".into()));
                }
                let table = embedding.bind(g, "embedding", trainable);
                let fwd = fwd.bind(g, "bilstm.fwd", trainable);
                let bwd = bwd.bind(g, "bilstm.bwd", trainable);
                let steps = (0..MAX_LEN)
                    .map(|t| {
                        let ids: Vec<usize> = seqs.iter().map(|s| s.ids()[t]).collect();
                        nn::embedding_lookup(g, table, &ids)
                    })
                    .collect::<Result<Vec<_>>>()?;
                nn::bilstm_encode(g, &fwd, &bwd, &steps)?
            }
            (
                Body::Fusion {
                    spec,
                    text_gate,
                    compress,
                    image_gate,
                },
                ModelInput::Dual { text, image },
            ) => {
                if text.shape().last() != Some(&spec.text_dim)
                    || image.shape().last() != Some(&spec.image_dim)
                {
                    return Err(Error::dim("fusion input", text.shape(), image.shape()));
                }
                let mut t = g.constant((*text).clone());
                if let Some(gp) = text_gate {
                    let theta = gp.bind(g, "fusion.text_gate", trainable);
                    t = nn::gate(g, gp.kind, theta, t)?;
                }
                let mut v = g.constant((*image).clone());
                if let Some(d) = compress {
                    let nodes = d.bind(g, "fusion.image_compress", trainable);
                    v = nn::dense(g, &nodes, v)?;
                }
                if let Some(gp) = image_gate {
                    let theta = gp.bind(g, "fusion.image_gate", trainable);
                    v = nn::gate(g, gp.kind, theta, v)?;
                }
                let joined = g.concat(&[t, v])?;
                if spec.dropout > 0.0 {
                    nn::dropout(g, joined, spec.dropout, mode, rng)?
                } else {
                    joined
                }
            }
            _ => {
                return Err(Error::Contract(format!(
                    "input {} does not fit a {} model",
                    input_kind(input),
                    self.body_kind()
                )))
            }
        };
        let head = self.head.bind(g, HEAD, trainable);
        let output = nn::dense(g, &head, features)?;
        Ok(Forward { features, output })
    }

    fn body_kind(&self) -> &'static str {
        match self.body {
            Body::FeedForward(_) => "feed-forward",
            Body::Text { .. } => "text",
            Body::Fusion { .. } => "fusion",
        }
    }

    fn eval_pass(&self, input: &ModelInput) -> Result<(Tensor, Tensor)> {
        let mut g = Graph::new();
        // eval mode never draws from the generator
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let f = self.forward(&mut g, input, Mode::Eval, false, &mut rng)?;
        Ok((g.value(f.features).clone(), g.value(f.output).clone()))
    }

    /// Head output in evaluation mode.
    pub fn output(&self, input: &ModelInput) -> Result<Tensor> {
        Ok(self.eval_pass(input)?.1)
    }

    /// Activations feeding the head, in evaluation mode.
    pub fn extract_penultimate(&self, input: &ModelInput) -> Result<Tensor> {
        Ok(self.eval_pass(input)?.0)
    }

    /// Class decision per input row: argmax for softmax heads, nearest label
    /// vector for projection heads.
    pub fn predict(&self, input: &ModelInput) -> Result<Vec<Sentiment>> {
        let out = self.output(input)?;
        self.decide(&out)
    }

    /// Class decisions for raw head outputs (`[B × k]` or `[k]`).
    pub fn decide(&self, out: &Tensor) -> Result<Vec<Sentiment>> {
        let (rows, cols) = out.as_matrix_dims();
        (0..rows)
            .map(|r| {
                let row = Tensor::vector(out.row(r).to_vec())?;
                match self.spec.head {
                    HeadSpec::Softmax => Ok(self.spec.classes[row.argmax()]),
                    HeadSpec::Projection { .. } => {
                        let labels = self.labels.as_ref().ok_or_else(|| {
                            Error::Lookup("projection model has no label embeddings".into())
                        })?;
                        debug_assert_eq!(cols, labels.dim());
                        predict_nearest_label(&row, labels, &self.spec.classes)
                    }
                }
            })
            .collect()
    }

    /// Head targets for `labels`: one-hot rows for softmax heads, label
    /// vectors for projection heads.
    pub fn targets(&self, labels: &[Sentiment]) -> Result<Tensor> {
        let k = self.spec.output_dim();
        let mut data = Vec::with_capacity(labels.len() * k);
        for l in labels {
            match self.spec.head {
                HeadSpec::Softmax => {
                    let idx = self
                        .spec
                        .classes
                        .iter()
                        .position(|c| c == l)
                        .ok_or_else(|| {
                            Error::Contract(format!("label {l} is not one of the model's classes"))
                        })?;
                    data.extend((0..k).map(|j| if j == idx { 1.0 } else { 0.0 }));
                }
                HeadSpec::Projection { .. } => {
                    let table = self.labels.as_ref().ok_or_else(|| {
                        Error::Lookup("projection model has no label embeddings".into())
                    })?;
                    data.extend_from_slice(table.get(l.word())?.data());
                }
            }
        }
        if labels.is_empty() {
            return Err(Error::Contract("no labels given".into()));
        }
        Tensor::matrix(labels.len(), k, data)
    }

    pub(crate) fn from_parts(
        spec: ModelSpec,
        params: &ParamSet,
        labels: Option<EmbeddingTable>,
    ) -> Result<Self> {
        // any generator works: every value is overwritten below
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut m = Model::init(spec, &mut rng)?;
        if params.len() != m.params().len() {
            return Err(Error::Spec(format!(
                "expected {} parameter tensors, found {}",
                m.params().len(),
                params.len()
            )));
        }
        m.load_params(params)?;
        if let Some(l) = labels {
            m.set_label_embeddings(&l)?;
        }
        Ok(m)
    }
}

fn input_kind(input: &ModelInput) -> &'static str {
    match input {
        ModelInput::Features(_) => "features",
        ModelInput::Tokens(_) => "tokens",
        ModelInput::Dual { .. } => "text+image features",
    }
}

/// Feed-forward model with a softmax head over precomputed image features.
pub fn build_classical_image<R: Rng + ?Sized>(spec: ModelSpec, rng: &mut R) -> Result<Model> {
    if !matches!(spec.body, BodySpec::FeedForward { .. }) || spec.head != HeadSpec::Softmax {
        return Err(Error::Spec(
            "a classical image model is a feed-forward body with a softmax head".into(),
        ));
    }
    Model::init(spec, rng)
}

/// `base` with its softmax head swapped for a linear projection to `dim`.
pub fn build_embedding_head<R: Rng + ?Sized>(
    base: &Model,
    dim: usize,
    labels: &EmbeddingTable,
    rng: &mut R,
) -> Result<Model> {
    base.with_projection_head(dim, labels, rng)
}

/// Embedding → BiLSTM → softmax over `classes`, at the default widths.
pub fn build_text_bilstm<R: Rng + ?Sized>(
    vocab_size: usize,
    classes: Vec<Sentiment>,
    rng: &mut R,
) -> Result<Model> {
    let spec = ModelSpec {
        classes,
        body: BodySpec::TextBilstm {
            vocab_size,
            embed_dim: super::spec::TEXT_EMBED_DIM,
            hidden: super::spec::TEXT_HIDDEN,
        },
        head: HeadSpec::Softmax,
    };
    Model::init(spec, rng)
}

/// Softmax over the concatenation of text and image features.
pub fn build_combined_concat<R: Rng + ?Sized>(
    text_dim: usize,
    image_dim: usize,
    classes: Vec<Sentiment>,
    rng: &mut R,
) -> Result<Model> {
    build_combined_gated(FusionSpec::concat(text_dim, image_dim), classes, rng)
}

pub fn build_combined_gated<R: Rng + ?Sized>(
    fusion: FusionSpec,
    classes: Vec<Sentiment>,
    rng: &mut R,
) -> Result<Model> {
    Model::init(
        ModelSpec {
            classes,
            body: BodySpec::Fusion(fusion),
            head: HeadSpec::Softmax,
        },
        rng,
    )
}
