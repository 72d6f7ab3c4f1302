use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sentifuse_core::data::{load_glove, Sentiment};
use sentifuse_core::metrics::Metrics;
use sentifuse_core::model::{
    build_embedding_head, HeadSpec, InputDims, Model, ModelSpec, PROJECTION_DIM,
};
use sentifuse_core::objectives::{LossKind, OptimizerKind};
use sentifuse_core::text::Vocabulary;
use sentifuse_core::train::{evaluate, train, EpochRecord, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::args::GlobalOpts;
use crate::records::{examples_for, read_records, PreparedRecord, VOCAB_FILE};
use crate::require;

/// Keys accepted in the `--config` file. Command-line flags take precedence.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub arch: Option<String>,
    pub two_class: Option<bool>,
    pub epochs: Option<usize>,
    pub batch_size: Option<usize>,
    pub loss: Option<LossKind>,
    pub optimizer: Option<OptimizerKind>,
    pub lr: Option<f64>,
    pub momentum: Option<f64>,
    pub seed: Option<u64>,
    pub eval_every_epoch: Option<bool>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    history: &'a [EpochRecord],
    best_epoch: Option<usize>,
    final_val: Metrics,
    best_val: Metrics,
}

fn initial_model(
    opts: &GlobalOpts,
    cfg: &RunConfig,
    train_set: &[PreparedRecord],
    data_dir: &Path,
    seed: u64,
) -> Result<Model> {
    if let Some(ck) = &opts.checkpoint {
        return Model::load(ck).with_context(|| format!("loading {}", ck.display()));
    }
    let two_class = opts.two_class
        || cfg.two_class.unwrap_or(false)
        || !train_set.iter().any(|r| r.label == Sentiment::Neutral);
    let arch = opts
        .arch
        .clone()
        .or_else(|| cfg.arch.clone())
        .unwrap_or_else(|| {
            if two_class {
                "image-2class"
            } else {
                "image-3class"
            }
            .to_string()
        });
    let mut dims = InputDims {
        image: train_set[0].features.len(),
        ..Default::default()
    };
    if arch == "text-bilstm" {
        dims.vocab = Vocabulary::load(&data_dir.join(VOCAB_FILE))?.len();
    }
    if let Some(tc) = &opts.text_checkpoint {
        dims.text = Model::load(tc)?.spec().penultimate_dim();
    }
    let spec = ModelSpec::preset(&arch, dims, two_class)?;
    Ok(Model::init(spec, &mut ChaCha8Rng::seed_from_u64(seed))?)
}

pub fn run(opts: &GlobalOpts) -> Result<()> {
    let data_dir = require(&opts.data, "--data")?;
    let out = require(&opts.out, "--out")?;
    let cfg = match &opts.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = opts.seed.or(cfg.seed).unwrap_or(0);
    let train_records = read_records(&data_dir.join("train.jsonl"))?;
    let val_records = read_records(&data_dir.join("val.jsonl"))?;

    let mut model = initial_model(opts, &cfg, &train_records, data_dir, seed)?;
    let default_loss = match model.spec().head {
        HeadSpec::Softmax => LossKind::CategoricalCrossEntropy,
        HeadSpec::Projection { .. } => LossKind::CosineProximity,
    };
    let loss = opts.loss.or(cfg.loss).unwrap_or(default_loss);
    if !loss.wants_probabilities() {
        let glove = || -> Result<_> {
            let path = require(&opts.glove, "--glove")?;
            Ok(load_glove(path, PROJECTION_DIM)?)
        };
        if model.spec().head == HeadSpec::Softmax {
            model = build_embedding_head(
                &model,
                PROJECTION_DIM,
                &glove()?,
                &mut ChaCha8Rng::seed_from_u64(seed),
            )?;
        } else if model.label_embeddings().is_none() {
            model.set_label_embeddings(&glove()?)?;
        }
    }

    let defaults = TrainConfig::default();
    let tcfg = TrainConfig {
        epochs: opts.epochs.or(cfg.epochs).unwrap_or(defaults.epochs),
        batch_size: opts
            .batch_size
            .or(cfg.batch_size)
            .unwrap_or(defaults.batch_size),
        loss,
        optimizer: opts
            .optimizer
            .or(cfg.optimizer)
            .unwrap_or(defaults.optimizer),
        lr: opts.lr.or(cfg.lr).unwrap_or(defaults.lr),
        momentum: opts.momentum.or(cfg.momentum).unwrap_or(defaults.momentum),
        seed,
        eval_every_epoch: cfg.eval_every_epoch.unwrap_or(defaults.eval_every_epoch),
    };

    let text_model = opts
        .text_checkpoint
        .as_deref()
        .map(Model::load)
        .transpose()?;
    let train_set = examples_for(&model, &train_records, text_model.as_ref())?;
    let val_set = examples_for(&model, &val_records, text_model.as_ref())?;
    if let Some(l) = train_records
        .iter()
        .map(|r| r.label)
        .find(|l| !model.classes().contains(l))
    {
        bail!(
            "training data has {l} records but the model only knows {:?}; prepare with --two-class",
            model.classes()
        );
    }

    let report = train(&mut model, &train_set, Some(&val_set), &tcfg)?;
    let best = report.best_model.as_ref().unwrap_or(&model);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    model.save(&out.join("model.sfck"))?;
    best.save(&out.join("model.best.sfck"))?;
    let summary = TrainSummary {
        history: &report.epochs,
        best_epoch: report.best_epoch,
        final_val: evaluate(&model, &val_set)?,
        best_val: evaluate(best, &val_set)?,
    };
    fs::write(
        out.join("metrics.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    println!(
        "trained {} epochs; validation accuracy {:.4} final, {:.4} best (epoch {})",
        tcfg.epochs,
        summary.final_val.accuracy,
        summary.best_val.accuracy,
        report.best_epoch.map_or("-".to_string(), |e| e.to_string())
    );
    Ok(())
}
