//! Mini-batch training and evaluation.

use log::{debug, info};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::data::{batch_indices, Sentiment};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::metrics::Metrics;
use crate::model::{HeadSpec, Model, ModelInput};
use crate::nn::Mode;
use crate::objectives::{LossKind, Optimizer, OptimizerKind};
use crate::tensor::Tensor;
use crate::text::EncodedSequence;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    pub optimizer: OptimizerKind,
    pub lr: f64,
    pub momentum: f64,
    pub seed: u64,
    /// Score the validation set after every epoch rather than only after
    /// the last one.
    pub eval_every_epoch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 20,
            batch_size: 64,
            loss: LossKind::CategoricalCrossEntropy,
            optimizer: OptimizerKind::Sgd,
            lr: 0.001,
            momentum: 0.9,
            seed: 0,
            eval_every_epoch: true,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config(
                "epochs and batch size must be at least 1".into(),
            ));
        }
        if !(self.lr.is_finite() && self.lr > 0.0) {
            return Err(Error::Config(format!(
                "learning rate must be positive, got {}",
                self.lr
            )));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::Config(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        Ok(())
    }
}

/// Fails unless `loss` suits the model's head: cross-entropy for softmax
/// heads, one of the embedding losses for projection heads.
pub fn check_compatible(model: &Model, loss: LossKind) -> Result<()> {
    let softmax = model.spec().head == HeadSpec::Softmax;
    if softmax != loss.wants_probabilities() {
        let head = if softmax { "softmax" } else { "projection" };
        return Err(Error::Config(format!(
            "loss '{loss}' does not fit a {head} head"
        )));
    }
    Ok(())
}

/// Model inputs for a set of records, stored row-aligned.
#[derive(Clone, Debug, PartialEq)]
pub enum Inputs {
    Features(Tensor),
    Tokens(Vec<EncodedSequence>),
    Dual { text: Tensor, image: Tensor },
}

fn select_rows(t: &Tensor, idx: &[usize]) -> Result<Tensor> {
    let rows: Vec<&[f64]> = idx.iter().map(|&i| t.row(i)).collect();
    Tensor::from_rows(&rows)
}

impl Inputs {
    pub fn len(&self) -> usize {
        match self {
            Inputs::Features(t) | Inputs::Dual { text: t, .. } => t.as_matrix_dims().0,
            Inputs::Tokens(s) => s.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn as_input(&self) -> ModelInput<'_> {
        match self {
            Inputs::Features(t) => ModelInput::Features(t),
            Inputs::Tokens(s) => ModelInput::Tokens(s),
            Inputs::Dual { text, image } => ModelInput::Dual { text, image },
        }
    }

    pub fn select(&self, idx: &[usize]) -> Result<Inputs> {
        Ok(match self {
            Inputs::Features(t) => Inputs::Features(select_rows(t, idx)?),
            Inputs::Tokens(s) => Inputs::Tokens(idx.iter().map(|&i| s[i].clone()).collect()),
            Inputs::Dual { text, image } => Inputs::Dual {
                text: select_rows(text, idx)?,
                image: select_rows(image, idx)?,
            },
        })
    }
}

/// Labeled inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct Examples {
    pub inputs: Inputs,
    pub labels: Vec<Sentiment>,
}

impl Examples {
    pub fn new(inputs: Inputs, labels: Vec<Sentiment>) -> Result<Self> {
        if inputs.len() != labels.len() {
            return Err(Error::Contract(format!(
                "{} inputs but {} labels",
                inputs.len(),
                labels.len()
            )));
        }
        if let Inputs::Dual { text, image } = &inputs {
            if text.as_matrix_dims().0 != image.as_matrix_dims().0 {
                return Err(Error::dim("dual inputs", text.shape(), image.shape()));
            }
        }
        Ok(Examples { inputs, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn select(&self, idx: &[usize]) -> Result<Examples> {
        Ok(Examples {
            inputs: self.inputs.select(idx)?,
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    /// Sample-weighted mean of the batch losses.
    pub train_loss: f64,
    /// Accuracy of the training-mode predictions made along the way.
    pub train_accuracy: f64,
    pub val_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct TrainReport {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch with the highest validation accuracy (earliest on
    /// ties); `None` without validation data.
    pub best_epoch: Option<usize>,
    pub best_model: Option<Model>,
}

const EVAL_CHUNK: usize = 256;

/// Trains `model` in place. Deterministic in `(cfg, model, train, val)`.
pub fn train(
    model: &mut Model,
    train: &Examples,
    val: Option<&Examples>,
    cfg: &TrainConfig,
) -> Result<TrainReport> {
    cfg.validate()?;
    check_compatible(model, cfg.loss)?;
    if train.is_empty() {
        return Err(Error::Contract("training set is empty".into()));
    }
    let mut opt = Optimizer::new(cfg.optimizer, cfg.lr, cfg.momentum);
    // dropout draws come from their own stream so that batch order and
    // masks do not interfere
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    dropout_rng.set_stream(u64::MAX);
    let mut report = TrainReport {
        epochs: Vec::with_capacity(cfg.epochs),
        best_epoch: None,
        best_model: None,
    };
    let mut best_acc = f64::NEG_INFINITY;

    for epoch in 0..cfg.epochs {
        let mut loss_sum = 0.0;
        let mut hits = 0usize;
        for idx in batch_indices(train.len(), cfg.batch_size, cfg.seed, epoch as u64)? {
            let batch = train.select(&idx)?;
            let target = model.targets(&batch.labels)?;
            let mut g = Graph::new();
            let fwd = model.forward(
                &mut g,
                &batch.inputs.as_input(),
                Mode::Train,
                true,
                &mut dropout_rng,
            )?;
            let t = g.constant(target);
            let loss = cfg.loss.apply(&mut g, fwd.output, t)?;
            let value = g.value(loss).data()[0];
            if !value.is_finite() {
                return Err(Error::Contract(format!(
                    "loss became {value} in epoch {}",
                    epoch + 1
                )));
            }
            loss_sum += value * idx.len() as f64;
            let predicted = model.decide(g.value(fwd.output))?;
            hits += predicted
                .iter()
                .zip(&batch.labels)
                .filter(|(p, l)| p == l)
                .count();
            let grads = g.backward(loss)?;
            let mut params = model.params_mut();
            opt.step(
                params.iter_mut().map(|(n, t)| (n.as_str(), &mut **t)),
                &grads,
            )?;
        }
        let last = epoch + 1 == cfg.epochs;
        let val_accuracy = match val {
            Some(v) if cfg.eval_every_epoch || last => Some(evaluate(model, v)?.accuracy),
            _ => None,
        };
        let record = EpochRecord {
            epoch: epoch + 1,
            train_loss: loss_sum / train.len() as f64,
            train_accuracy: hits as f64 / train.len() as f64,
            val_accuracy,
        };
        debug!("epoch {}: {:?}", record.epoch, record);
        if let Some(acc) = val_accuracy {
            if acc > best_acc {
                best_acc = acc;
                report.best_epoch = Some(record.epoch);
                report.best_model = Some(model.clone());
            }
        }
        report.epochs.push(record);
    }
    if let Some(e) = report.epochs.last() {
        info!(
            "trained {} epochs: loss {:.4}, train acc {:.4}, val acc {:?}",
            e.epoch, e.train_loss, e.train_accuracy, e.val_accuracy
        );
    }
    Ok(report)
}

/// Predictions for every example, computed in evaluation mode.
pub fn predict_all(model: &Model, inputs: &Inputs) -> Result<Vec<Sentiment>> {
    let all: Vec<usize> = (0..inputs.len()).collect();
    let mut out = Vec::with_capacity(all.len());
    for chunk in all.chunks(EVAL_CHUNK) {
        out.extend(model.predict(&inputs.select(chunk)?.as_input())?);
    }
    Ok(out)
}

/// Head outputs for every example, stacked into `[N × k]`.
pub fn outputs_all(model: &Model, inputs: &Inputs) -> Result<Tensor> {
    let all: Vec<usize> = (0..inputs.len()).collect();
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(all.len());
    for chunk in all.chunks(EVAL_CHUNK) {
        let out = model.output(&inputs.select(chunk)?.as_input())?;
        rows.extend((0..chunk.len()).map(|r| out.row(r).to_vec()));
    }
    Tensor::from_rows(&rows)
}

pub fn evaluate(model: &Model, data: &Examples) -> Result<Metrics> {
    if data.is_empty() {
        return Err(Error::Contract(
            "cannot evaluate on an empty dataset".into(),
        ));
    }
    let predicted = predict_all(model, &data.inputs)?;
    Metrics::from_predictions(model.classes(), &data.labels, &predicted)
}
