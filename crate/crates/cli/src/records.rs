//! Prepared split files: one JSON object per line holding the record id,
//! its ANP, label, feature vector and encoded text.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use sentifuse_core::data::Sentiment;
use sentifuse_core::model::{BodySpec, Model};
use sentifuse_core::text::EncodedSequence;
use sentifuse_core::train::{outputs_all, Examples, Inputs};
use sentifuse_core::Tensor;
use serde::{Deserialize, Serialize};

pub const SPLITS: [&str; 3] = ["train", "val", "test"];
pub const VOCAB_FILE: &str = "vocab.tsv";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreparedRecord {
    pub id: String,
    pub anp: String,
    pub label: Sentiment,
    pub features: Vec<f64>,
    pub tokens: EncodedSequence,
}

pub fn write_records(path: &Path, records: &[PreparedRecord]) -> Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = BufWriter::new(file);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<PreparedRecord>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let r =
            serde_json::from_str(&line).with_context(|| format!("{}:{}", path.display(), i + 1))?;
        out.push(r);
    }
    if out.is_empty() {
        bail!("{} holds no records", path.display());
    }
    Ok(out)
}

fn feature_matrix(records: &[PreparedRecord]) -> Result<Tensor> {
    let rows: Vec<&[f64]> = records.iter().map(|r| r.features.as_slice()).collect();
    Ok(Tensor::from_rows(&rows)?)
}

/// Model inputs for `records` in the form `spec` consumes. Fusion models
/// take their text side from `text_model`'s penultimate layer.
pub fn examples_for(
    model: &Model,
    records: &[PreparedRecord],
    text_model: Option<&Model>,
) -> Result<Examples> {
    let labels = records.iter().map(|r| r.label).collect();
    let tokens = || records.iter().map(|r| r.tokens.clone()).collect::<Vec<_>>();
    let inputs = match &model.spec().body {
        BodySpec::FeedForward { .. } => Inputs::Features(feature_matrix(records)?),
        BodySpec::TextBilstm { .. } => Inputs::Tokens(tokens()),
        BodySpec::Fusion(_) => {
            let Some(text_model) = text_model else {
                bail!("fusion models need --text-checkpoint");
            };
            Inputs::Dual {
                text: text_features(text_model, &Inputs::Tokens(tokens()))?,
                image: feature_matrix(records)?,
            }
        }
    };
    Ok(Examples::new(inputs, labels)?)
}

fn text_features(text_model: &Model, tokens: &Inputs) -> Result<Tensor> {
    if !matches!(text_model.spec().body, BodySpec::TextBilstm { .. }) {
        bail!("--text-checkpoint must hold a text model");
    }
    let all: Vec<usize> = (0..tokens.len()).collect();
    let mut rows = Vec::with_capacity(all.len());
    for chunk in all.chunks(64) {
        let f = text_model.extract_penultimate(&tokens.select(chunk)?.as_input())?;
        rows.extend((0..chunk.len()).map(|r| f.row(r).to_vec()));
    }
    Ok(Tensor::from_rows(&rows)?)
}

/// Head outputs for every example, one tensor per row.
pub fn output_rows(model: &Model, examples: &Examples) -> Result<Vec<Tensor>> {
    let out = outputs_all(model, &examples.inputs)?;
    let (rows, _) = out.as_matrix_dims();
    (0..rows)
        .map(|r| Ok(Tensor::vector(out.row(r).to_vec())?))
        .collect()
}
