//! Finite-difference checks over every differentiable layer and loss, on
//! small random instances.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{finite_diff_check, GradCheckConfig, GradReport};
use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::nn::{self, Activation, GateKind, Mode};
use crate::objectives::LossKind;
use crate::params::ParamSet;
use crate::tensor::Tensor;

pub const SUITE_CASES: [&str; 14] = [
    "dense_relu",
    "dense_linear",
    "dense_softmax",
    "dense_dropout_eval",
    "dense_dropout_fixed_mask",
    "gate_gl1",
    "gate_gl2",
    "embedding_lookup",
    "lstm_step",
    "bilstm_encode",
    "loss_xent",
    "loss_cosine",
    "loss_hinge",
    "loss_mse",
];

#[derive(Clone, Debug)]
pub struct SuiteCase {
    pub name: &'static str,
    pub seed: u64,
    pub report: GradReport,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub cases: Vec<SuiteCase>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.cases.iter().all(|c| c.report.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &SuiteCase> {
        self.cases.iter().filter(|c| !c.report.passed)
    }

    pub fn worst_rel_diff(&self) -> f64 {
        self.cases
            .iter()
            .map(|c| c.report.max_rel_diff())
            .fold(0.0, f64::max)
    }
}

/// Runs every case in [`SUITE_CASES`] once per seed.
pub fn run_suite(seeds: &[u64], cfg: &GradCheckConfig) -> Result<SuiteReport> {
    let mut out = SuiteReport::default();
    for &seed in seeds {
        for name in SUITE_CASES {
            let report = run_case(name, seed, cfg)?;
            out.cases.push(SuiteCase { name, seed, report });
        }
    }
    Ok(out)
}

fn uniform(shape: &[usize], rng: &mut ChaCha8Rng) -> Tensor {
    Tensor::uniform(shape, -1.0, 1.0, rng).expect("positive extents")
}

// Reduces a node to a scalar through a fixed random projection so every
// output entry contributes a distinct weight.
fn project(g: &mut Graph, y: NodeId, weights: &Tensor) -> Result<NodeId> {
    let w = g.constant(weights.clone());
    let p = g.mul(y, w)?;
    Ok(g.sum(p))
}

fn bind(g: &mut Graph, p: &ParamSet, name: &str) -> Result<NodeId> {
    Ok(g.param(name, p.get(name)?.clone()))
}

fn run_case(name: &str, seed: u64, cfg: &GradCheckConfig) -> Result<GradReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = ParamSet::new();
    let (batch, input, output) = (3, 4, 3);

    match name {
        "dense_relu" | "dense_linear" | "dense_softmax" => {
            let act = match name {
                "dense_relu" => Activation::Relu,
                "dense_linear" => Activation::Linear,
                _ => Activation::Softmax,
            };
            p.insert("w", uniform(&[output, input], &mut rng));
            p.insert("b", uniform(&[output], &mut rng));
            p.insert("x", uniform(&[batch, input], &mut rng));
            let r = uniform(&[batch, output], &mut rng);
            finite_diff_check(&p, cfg, |g, p| {
                let nodes = nn::DenseNodes {
                    weight: bind(g, p, "w")?,
                    bias: bind(g, p, "b")?,
                    activation: act,
                };
                let x = bind(g, p, "x")?;
                let y = nn::dense(g, &nodes, x)?;
                project(g, y, &r)
            })
        }
        "dense_dropout_eval" | "dense_dropout_fixed_mask" => {
            let mode = if name.ends_with("eval") {
                Mode::Eval
            } else {
                Mode::Train
            };
            let mask_seed = rng.random::<u64>();
            p.insert("w", uniform(&[output, input], &mut rng));
            p.insert("b", uniform(&[output], &mut rng));
            p.insert("x", uniform(&[batch, input], &mut rng));
            let r = uniform(&[batch, output], &mut rng);
            finite_diff_check(&p, cfg, |g, p| {
                let nodes = nn::DenseNodes {
                    weight: bind(g, p, "w")?,
                    bias: bind(g, p, "b")?,
                    activation: Activation::Linear,
                };
                let x = bind(g, p, "x")?;
                let y = nn::dense(g, &nodes, x)?;
                // same mask on every evaluation
                let mut mask_rng = ChaCha8Rng::seed_from_u64(mask_seed);
                let d = nn::dropout(g, y, 0.3, mode, &mut mask_rng)?;
                project(g, d, &r)
            })
        }
        "gate_gl1" | "gate_gl2" => {
            let kind = if name == "gate_gl1" {
                GateKind::GL1
            } else {
                GateKind::GL2
            };
            p.insert("theta", uniform(&[input], &mut rng));
            p.insert("x", uniform(&[batch, input], &mut rng));
            let r = uniform(&[batch, input], &mut rng);
            finite_diff_check(&p, cfg, |g, p| {
                let theta = bind(g, p, "theta")?;
                let x = bind(g, p, "x")?;
                let y = nn::gate(g, kind, theta, x)?;
                project(g, y, &r)
            })
        }
        "embedding_lookup" => {
            let (vocab, dim) = (6, 3);
            let mut table = uniform(&[vocab, dim], &mut rng);
            table.data_mut()[..dim].fill(0.0);
            p.insert("table", table);
            // padding deliberately absent: its row is frozen, so its analytic
            // gradient is zero by construction rather than by calculus
            let ids: Vec<usize> = (0..5).map(|_| rng.random_range(1..vocab)).collect();
            let r = uniform(&[ids.len(), dim], &mut rng);
            finite_diff_check(&p, cfg, |g, p| {
                let t = bind(g, p, "table")?;
                let rows = nn::embedding_lookup(g, t, &ids)?;
                project(g, rows, &r)
            })
        }
        "lstm_step" => {
            let hidden = 3;
            let lstm = random_lstm(input, hidden, &mut rng);
            lstm.visit("cell", &mut |n, t| p.insert(n, t.clone()));
            p.insert("x", uniform(&[batch, input], &mut rng));
            p.insert("h", uniform(&[batch, hidden], &mut rng));
            p.insert("c", uniform(&[batch, hidden], &mut rng));
            let rh = uniform(&[batch, hidden], &mut rng);
            let rc = uniform(&[batch, hidden], &mut rng);
            finite_diff_check(&p, cfg, |g, p| {
                let nodes = rebuild_lstm(p, "cell", input, hidden)?.bind(g, "cell", true);
                let (x, h, c) = (bind(g, p, "x")?, bind(g, p, "h")?, bind(g, p, "c")?);
                let (h2, c2) = nn::lstm_step(g, &nodes, x, h, c)?;
                let a = project(g, h2, &rh)?;
                let b = project(g, c2, &rc)?;
                g.add(a, b)
            })
        }
        "bilstm_encode" => {
            let (hidden, steps) = (2, 3);
            random_lstm(input, hidden, &mut rng).visit("fwd", &mut |n, t| p.insert(n, t.clone()));
            random_lstm(input, hidden, &mut rng).visit("bwd", &mut |n, t| p.insert(n, t.clone()));
            for s in 0..steps {
                p.insert(format!("x{s}"), uniform(&[batch, input], &mut rng));
            }
            let r = uniform(&[batch, 2 * hidden], &mut rng);
            finite_diff_check(&p, cfg, |g, p| {
                let fwd = rebuild_lstm(p, "fwd", input, hidden)?.bind(g, "fwd", true);
                let bwd = rebuild_lstm(p, "bwd", input, hidden)?.bind(g, "bwd", true);
                let seq = (0..steps)
                    .map(|s| bind(g, p, &format!("x{s}")))
                    .collect::<Result<Vec<_>>>()?;
                let y = nn::bilstm_encode(g, &fwd, &bwd, &seq)?;
                project(g, y, &r)
            })
        }
        "loss_xent" => {
            let k = 4;
            p.insert("logits", uniform(&[batch, k], &mut rng));
            let mut onehot = vec![0.0; batch * k];
            for row in 0..batch {
                onehot[row * k + rng.random_range(0..k)] = 1.0;
            }
            let target = Tensor::matrix(batch, k, onehot)?;
            finite_diff_check(&p, cfg, |g, p| {
                let z = bind(g, p, "logits")?;
                let probs = g.softmax(z);
                let t = g.constant(target.clone());
                LossKind::CategoricalCrossEntropy.apply(g, probs, t)
            })
        }
        "loss_cosine" | "loss_hinge" | "loss_mse" => {
            let kind = match name {
                "loss_cosine" => LossKind::CosineProximity,
                "loss_hinge" => LossKind::Hinge,
                _ => LossKind::Mse,
            };
            let dim = 5;
            p.insert("pred", uniform(&[batch, dim], &mut rng));
            let target = uniform(&[batch, dim], &mut rng);
            finite_diff_check(&p, cfg, |g, p| {
                let pred = bind(g, p, "pred")?;
                let t = g.constant(target.clone());
                kind.apply(g, pred, t)
            })
        }
        other => Err(crate::Error::Config(format!(
            "unknown gradient-check case '{other}'"
        ))),
    }
}

// Gate weights drawn from [-1, 1] rather than the small training init, so
// the check exercises the nonlinear range of every gate.
fn random_lstm(input: usize, hidden: usize, rng: &mut ChaCha8Rng) -> nn::LstmParams {
    let mut lstm = nn::LstmParams::zeros(input, hidden).expect("positive sizes");
    lstm.visit_mut("", &mut |_, t| *t = uniform(t.shape(), rng));
    lstm
}

fn rebuild_lstm(p: &ParamSet, prefix: &str, input: usize, hidden: usize) -> Result<nn::LstmParams> {
    let mut lstm = nn::LstmParams::zeros(input, hidden)?;
    let mut missing = None;
    lstm.visit_mut(prefix, &mut |n, t| match p.get(&n) {
        Ok(v) => *t = v.clone(),
        Err(e) => missing = Some(e),
    });
    match missing {
        Some(e) => Err(e),
        None => Ok(lstm),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::OpKind;

    #[test]
    fn every_case_passes_on_a_few_seeds() {
        let report = run_suite(&[0, 1, 2], &GradCheckConfig::default()).unwrap();
        assert_eq!(report.cases.len(), 3 * SUITE_CASES.len());
        let failures: Vec<_> = report
            .failures()
            .map(|c| (c.name, c.seed, c.report.max_rel_diff()))
            .collect();
        assert!(failures.is_empty(), "{failures:?}");
    }

    #[test]
    fn corrupted_sigmoid_is_caught_in_lstm_cases() {
        let cfg = GradCheckConfig {
            fault: Some(OpKind::Sigmoid),
            ..Default::default()
        };
        let report = run_suite(&[5], &cfg).unwrap();
        let failed: Vec<_> = report.failures().map(|c| c.name).collect();
        assert!(failed.contains(&"lstm_step"));
        assert!(failed.contains(&"bilstm_encode"));
        assert!(!failed.contains(&"dense_linear"));
    }
}
