//! Accuracy and confusion counts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::data::Sentiment;
use crate::error::{Error, Result};

/// Evaluation summary. `confusion[i][j]` counts records of true class
/// `classes[i]` predicted as `classes[j]`. Classes without any true record
/// have no entry in `per_class`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub per_class: BTreeMap<Sentiment, f64>,
    pub confusion: Vec<Vec<u64>>,
}

impl Metrics {
    pub fn from_confusion(classes: &[Sentiment], confusion: Vec<Vec<u64>>) -> Result<Self> {
        let k = classes.len();
        if confusion.len() != k || confusion.iter().any(|r| r.len() != k) {
            return Err(Error::Contract(format!("confusion matrix must be {k}×{k}")));
        }
        let total: u64 = confusion.iter().flatten().sum();
        if total == 0 {
            return Err(Error::Contract(
                "cannot compute metrics for an empty dataset".into(),
            ));
        }
        let trace: u64 = (0..k).map(|i| confusion[i][i]).sum();
        let per_class = classes
            .iter()
            .zip(&confusion)
            .enumerate()
            .filter_map(|(i, (&c, row))| {
                let support: u64 = row.iter().sum();
                (support > 0).then(|| (c, row[i] as f64 / support as f64))
            })
            .collect();
        Ok(Metrics {
            accuracy: trace as f64 / total as f64,
            per_class,
            confusion,
        })
    }

    pub fn from_predictions(
        classes: &[Sentiment],
        truth: &[Sentiment],
        predicted: &[Sentiment],
    ) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Contract(format!(
                "{} labels but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let pos = |s: Sentiment| {
            classes
                .iter()
                .position(|&c| c == s)
                .ok_or_else(|| Error::Contract(format!("label {s} is not among {classes:?}")))
        };
        let mut confusion = vec![vec![0u64; classes.len()]; classes.len()];
        for (&t, &p) in truth.iter().zip(predicted) {
            confusion[pos(t)?][pos(p)?] += 1;
        }
        Self::from_confusion(classes, confusion)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}
