use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::{self, Tensor};

/// Probability floor inside the cross-entropy logarithm.
pub const PROB_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LossKind {
    #[serde(rename = "xent", alias = "categorical_cross_entropy")]
    CategoricalCrossEntropy,
    #[serde(rename = "cosine", alias = "cosine_proximity")]
    CosineProximity,
    #[serde(rename = "mse", alias = "mean_squared_error")]
    Mse,
    #[serde(rename = "hinge")]
    Hinge,
}

impl LossKind {
    pub fn name(self) -> &'static str {
        match self {
            LossKind::CategoricalCrossEntropy => "xent",
            LossKind::CosineProximity => "cosine",
            LossKind::Mse => "mse",
            LossKind::Hinge => "hinge",
        }
    }

    /// Whether the loss expects a probability vector (softmax head) rather
    /// than a point in label-embedding space.
    pub fn wants_probabilities(self) -> bool {
        self == LossKind::CategoricalCrossEntropy
    }

    /// Records the batch-mean loss of `pred` against `target` (both `[n]` or
    /// `[batch × n]`) and returns the scalar node.
    pub fn apply(self, g: &mut Graph, pred: NodeId, target: NodeId) -> Result<NodeId> {
        if g.shape(pred) != g.shape(target) {
            return Err(Error::dim(self.name(), g.shape(pred), g.shape(target)));
        }
        match self {
            LossKind::CategoricalCrossEntropy => {
                let t = g.value(target);
                let (rows, _) = t.as_matrix_dims();
                for r in 0..rows {
                    check_one_hot(t.row(r))?;
                }
                let logp = g.ln_clipped(pred, PROB_FLOOR);
                let picked = g.mul(logp, target)?;
                let total = g.sum(picked);
                Ok(g.scale(total, -1.0 / rows as f64))
            }
            LossKind::CosineProximity => {
                let c = g.cosine(pred, target)?;
                let m = g.mean(c);
                Ok(g.scale(m, -1.0))
            }
            LossKind::Mse => {
                let d = g.sub(pred, target)?;
                let sq = g.mul(d, d)?;
                Ok(g.mean(sq))
            }
            LossKind::Hinge => {
                let prod = g.mul(target, pred)?;
                let neg = g.scale(prod, -1.0);
                let margin = g.add_scalar(neg, 1.0);
                let clipped = g.relu(margin);
                Ok(g.mean(clipped))
            }
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|_| {
            Error::Config(format!(
                "unknown loss '{s}' (expected xent, cosine, hinge or mse)"
            ))
        })
    }
}

fn check_one_hot(row: &[f64]) -> Result<()> {
    let ones = row.iter().filter(|&&v| v == 1.0).count();
    if ones == 1 && row.iter().all(|&v| v == 0.0 || v == 1.0) {
        Ok(())
    } else {
        Err(Error::Contract(format!("target is not one-hot: {row:?}")))
    }
}

fn same_shape(op: &'static str, pred: &Tensor, target: &Tensor) -> Result<()> {
    if pred.shape() == target.shape() {
        Ok(())
    } else {
        Err(Error::dim(op, pred.shape(), target.shape()))
    }
}

/// `−Σ target · ln(clip(pred, 1e-12, 1))`.
pub fn categorical_cross_entropy(pred: &Tensor, target: &Tensor) -> Result<f64> {
    same_shape("categorical_cross_entropy", pred, target)?;
    if (pred.sum() - 1.0).abs() > 1e-9 {
        return Err(Error::Contract(format!(
            "prediction sums to {}, not 1",
            pred.sum()
        )));
    }
    check_one_hot(target.data())?;
    Ok(-pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| t * p.clamp(PROB_FLOOR, 1.0).ln())
        .sum::<f64>())
}

/// Negated cosine similarity; −1 for parallel vectors.
pub fn cosine_proximity(pred: &Tensor, target: &Tensor) -> Result<f64> {
    same_shape("cosine_proximity", pred, target)?;
    Ok(-tensor::cosine(pred.data(), target.data())?)
}

/// Mean of `max(0, 1 − target_i · pred_i)`.
pub fn hinge(pred: &Tensor, target: &Tensor) -> Result<f64> {
    same_shape("hinge", pred, target)?;
    let total: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| (1.0 - t * p).max(0.0))
        .sum();
    Ok(total / pred.len() as f64)
}

pub fn mse(pred: &Tensor, target: &Tensor) -> Result<f64> {
    same_shape("mse", pred, target)?;
    let total: f64 = pred
        .data()
        .iter()
        .zip(target.data())
        .map(|(&p, &t)| (p - t) * (p - t))
        .sum();
    Ok(total / pred.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(v: &[f64]) -> Tensor {
        Tensor::vector(v.to_vec()).unwrap()
    }

    #[test]
    fn cross_entropy_examples() {
        let l = categorical_cross_entropy(&t(&[0.5, 0.5]), &t(&[1.0, 0.0])).unwrap();
        assert!((l - std::f64::consts::LN_2).abs() < 1e-15);
        let l = categorical_cross_entropy(&t(&[0.0, 1.0, 0.0]), &t(&[0.0, 1.0, 0.0])).unwrap();
        assert!(l <= 1e-11);
        let l = categorical_cross_entropy(&t(&[1e-12, 1.0 - 1e-12]), &t(&[1.0, 0.0])).unwrap();
        assert!(l.is_finite());
        assert!((l - 27.631021115928547).abs() < 1e-9, "{l}");
    }

    #[test]
    fn cross_entropy_rejects_bad_inputs() {
        assert!(matches!(
            categorical_cross_entropy(&t(&[0.5, 0.5]), &t(&[0.5, 0.5])),
            Err(Error::Contract(_))
        ));
        assert!(categorical_cross_entropy(&t(&[0.5, 0.6]), &t(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn cosine_proximity_examples() {
        let v = t(&[0.2, -0.4, 1.0]);
        assert!((cosine_proximity(&v, &v).unwrap() + 1.0).abs() < 1e-15);
        assert!((cosine_proximity(&v.scale(-1.0), &v).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            cosine_proximity(&t(&[1.0, 0.0]), &t(&[0.0, 3.0])).unwrap(),
            0.0
        );
        assert!(matches!(
            cosine_proximity(&t(&[0.0, 0.0]), &t(&[1.0, 0.0])),
            Err(Error::DegenerateVector(_))
        ));
    }

    #[test]
    fn hinge_examples() {
        let ones = t(&[1.0; 4]);
        assert_eq!(hinge(&ones, &ones).unwrap(), 0.0);
        assert_eq!(hinge(&t(&[0.0; 3]), &t(&[0.3, -2.0, 5.0])).unwrap(), 1.0);
        assert_eq!(hinge(&t(&[2.0, -2.0]), &t(&[1.0, 1.0])).unwrap(), 1.5);
        assert!(matches!(
            hinge(&t(&[1.0]), &t(&[1.0, 2.0])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn mse_examples() {
        let v = t(&[0.1, 0.2]);
        assert_eq!(mse(&v, &v).unwrap(), 0.0);
        assert_eq!(mse(&t(&[1.0, 1.0]), &t(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(mse(&t(&[3.0]), &t(&[1.0])).unwrap(), 4.0);
        assert!(mse(&t(&[3.0]), &t(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn graph_losses_match_eager_definitions() {
        let pred = t(&[0.3, -0.8, 1.7]);
        let target = t(&[0.9, 0.4, -0.2]);
        for (kind, expected) in [
            (
                LossKind::CosineProximity,
                cosine_proximity(&pred, &target).unwrap(),
            ),
            (LossKind::Hinge, hinge(&pred, &target).unwrap()),
            (LossKind::Mse, mse(&pred, &target).unwrap()),
        ] {
            let mut g = Graph::new();
            let p = g.constant(pred.clone());
            let tn = g.constant(target.clone());
            let l = kind.apply(&mut g, p, tn).unwrap();
            assert!((g.value(l).data()[0] - expected).abs() < 1e-15, "{kind}");
        }
        let probs = t(&[0.2, 0.7, 0.1]);
        let onehot = t(&[0.0, 1.0, 0.0]);
        let mut g = Graph::new();
        let p = g.constant(probs.clone());
        let tn = g.constant(onehot.clone());
        let l = LossKind::CategoricalCrossEntropy
            .apply(&mut g, p, tn)
            .unwrap();
        assert!(
            (g.value(l).data()[0] - categorical_cross_entropy(&probs, &onehot).unwrap()).abs()
                < 1e-15
        );
    }

    #[test]
    fn names_parse() {
        for k in [
            LossKind::CategoricalCrossEntropy,
            LossKind::CosineProximity,
            LossKind::Mse,
            LossKind::Hinge,
        ] {
            assert_eq!(k.name().parse::<LossKind>().unwrap(), k);
        }
        assert_eq!(
            "cosine_proximity".parse::<LossKind>().unwrap(),
            LossKind::CosineProximity
        );
        assert!("l1".parse::<LossKind>().is_err());
    }

    proptest! {
        #[test]
        fn losses_respect_their_minimum(
            pair in (1usize..12).prop_flat_map(|n| (
                prop::collection::vec(-3.0f64..3.0, n),
                prop::collection::vec(-3.0f64..3.0, n),
                0..n,
            )),
        ) {
            let (p, q, hot) = pair;
            let (pred, target) = (t(&p), t(&q));
            prop_assert!(hinge(&pred, &target).unwrap() >= 0.0);
            prop_assert!(mse(&pred, &target).unwrap() >= 0.0);
            if pred.norm() > 0.0 && target.norm() > 0.0 {
                prop_assert!(cosine_proximity(&pred, &target).unwrap() >= -1.0);
            }
            let probs = pred.softmax();
            let mut onehot = vec![0.0; p.len()];
            onehot[hot] = 1.0;
            prop_assert!(categorical_cross_entropy(&probs, &t(&onehot)).unwrap() >= 0.0);
        }
    }
}
