use rand::Rng;

use super::bind_tensor;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::Tensor;

/// Row reserved for padding. It is zero and never updated.
pub const PADDING_INDEX: usize = 0;

const INIT_RANGE: f64 = 0.05;

/// Token embedding table `[V × d]`.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingParams {
    pub table: Tensor,
}

impl EmbeddingParams {
    pub fn new(table: Tensor) -> Result<Self> {
        if table.rank() != 2 {
            return Err(Error::Contract(format!(
                "embedding table must be a matrix, got {:?}",
                table.shape()
            )));
        }
        if table.row(PADDING_INDEX).iter().any(|&v| v != 0.0) {
            return Err(Error::Contract("embedding padding row must be zero".into()));
        }
        Ok(EmbeddingParams { table })
    }

    pub fn init<R: Rng + ?Sized>(vocab: usize, dim: usize, rng: &mut R) -> Result<Self> {
        let mut table = Tensor::uniform(&[vocab, dim], -INIT_RANGE, INIT_RANGE, rng)?;
        table.data_mut()[..dim].fill(0.0);
        Self::new(table)
    }

    pub fn vocab_size(&self) -> usize {
        self.table.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.table.shape()[1]
    }

    pub fn bind(&self, g: &mut Graph, prefix: &str, trainable: bool) -> NodeId {
        bind_tensor(g, &format!("{prefix}.table"), &self.table, trainable)
    }

    pub fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor)) {
        f(format!("{prefix}.table"), &self.table);
    }

    pub fn visit_mut<'a>(&'a mut self, prefix: &str, f: &mut dyn FnMut(String, &'a mut Tensor)) {
        f(format!("{prefix}.table"), &mut self.table);
    }

    pub fn lookup(&self, ids: &[usize]) -> Result<Vec<Tensor>> {
        ids.iter()
            .map(|&id| {
                if id >= self.vocab_size() {
                    return Err(Error::OutOfRange {
                        what: "embedding table",
                        index: id,
                        size: self.vocab_size(),
                    });
                }
                Tensor::vector(self.table.row(id).to_vec())
            })
            .collect()
    }
}

/// `[ids.len() × d]` rows of `table`; the padding row gets no gradient.
pub fn embedding_lookup(g: &mut Graph, table: NodeId, ids: &[usize]) -> Result<NodeId> {
    g.gather(table, ids, Some(PADDING_INDEX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objectives::{Optimizer, OptimizerKind};
    use crate::params::ParamSet;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn padding_row_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let e = EmbeddingParams::init(10, 200, &mut rng).unwrap();
        assert_eq!(
            e.lookup(&[0]).unwrap(),
            vec![Tensor::zeros(&[200]).unwrap()]
        );
    }

    #[test]
    fn repeated_id_shares_row_and_sums_gradients() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let e = EmbeddingParams::init(5, 3, &mut rng).unwrap();
        let rows = e.lookup(&[2, 2]).unwrap();
        assert_eq!(rows[0], rows[1]);

        let mut g = Graph::new();
        let t = e.bind(&mut g, "emb", true);
        let looked = embedding_lookup(&mut g, t, &[2, 2]).unwrap();
        let loss = g.sum(looked);
        let grad = g.backward(loss).unwrap().get("emb.table").unwrap().clone();
        assert_eq!(grad.row(2), &[2.0, 2.0, 2.0]);
        assert_eq!(grad.sum(), 6.0);
    }

    #[test]
    fn out_of_range_id_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let e = EmbeddingParams::init(4, 2, &mut rng).unwrap();
        assert!(matches!(
            e.lookup(&[4]),
            Err(Error::OutOfRange {
                index: 4,
                size: 4,
                ..
            })
        ));
    }

    #[test]
    fn sgd_step_touches_only_the_used_row() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let e = EmbeddingParams::init(6, 4, &mut rng).unwrap();
        let mut params = ParamSet::new();
        params.insert("emb.table", e.table.clone());

        let mut g = Graph::new();
        let t = g.param("emb.table", e.table.clone());
        let looked = embedding_lookup(&mut g, t, &[3, 0]).unwrap();
        let sq = g.mul(looked, looked).unwrap();
        let loss = g.sum(sq);
        let grads = g.backward(loss).unwrap();

        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, 0.9);
        opt.step(params.iter_mut(), &grads).unwrap();
        let after = params.get("emb.table").unwrap();
        for row in 0..6 {
            if row == 3 {
                assert_ne!(after.row(row), e.table.row(row));
            } else {
                assert_eq!(after.row(row), e.table.row(row), "row {row} moved");
            }
        }
    }
}
