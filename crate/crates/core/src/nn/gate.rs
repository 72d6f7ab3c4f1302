use serde::{Deserialize, Serialize};

use super::bind_tensor;
use crate::error::{Error, Result};
use crate::graph::{self, Graph, NodeId};
use crate::tensor::Tensor;

/// Elementwise gating layers. `GL1` multiplies by the raw weights; `GL2`
/// multiplies by `sigmoid(theta)`, which keeps every effective weight in
/// `(0, 1)` whatever value the optimizer gives `theta`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateKind {
    #[serde(rename = "gl1", alias = "GL1")]
    GL1,
    #[serde(rename = "gl2", alias = "GL2")]
    GL2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateParams {
    pub kind: GateKind,
    pub theta: Tensor,
}

impl GateParams {
    /// GL1 starts at ones (identity), GL2 at zero (every gate at 0.5).
    pub fn init(kind: GateKind, n: usize) -> Result<Self> {
        let theta = match kind {
            GateKind::GL1 => Tensor::ones(&[n])?,
            GateKind::GL2 => Tensor::zeros(&[n])?,
        };
        Ok(GateParams { kind, theta })
    }

    pub fn effective(&self) -> Tensor {
        match self.kind {
            GateKind::GL1 => self.theta.clone(),
            GateKind::GL2 => self.theta.map(graph::open_sigmoid),
        }
    }

    pub fn bind(&self, g: &mut Graph, prefix: &str, trainable: bool) -> NodeId {
        bind_tensor(g, &format!("{prefix}.theta"), &self.theta, trainable)
    }

    pub fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor)) {
        f(format!("{prefix}.theta"), &self.theta);
    }

    pub fn visit_mut<'a>(&'a mut self, prefix: &str, f: &mut dyn FnMut(String, &'a mut Tensor)) {
        f(format!("{prefix}.theta"), &mut self.theta);
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut g = Graph::new();
        let theta = self.bind(&mut g, "gate", false);
        let xn = g.constant(x.clone());
        let y = gate(&mut g, self.kind, theta, xn)?;
        Ok(g.value(y).clone())
    }
}

/// Gated copy of `x` (`[n]` or `[batch × n]`) with the same shape.
pub fn gate(g: &mut Graph, kind: GateKind, theta: NodeId, x: NodeId) -> Result<NodeId> {
    let n = *g.shape(x).last().unwrap();
    if g.shape(theta) != [n] {
        return Err(Error::dim("gate", g.shape(theta), g.shape(x)));
    }
    let weights = match kind {
        GateKind::GL1 => theta,
        GateKind::GL2 => g.open_sigmoid(theta),
    };
    g.mul(x, weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn t(v: &[f64]) -> Tensor {
        Tensor::vector(v.to_vec()).unwrap()
    }

    #[test]
    fn gl1_examples() {
        let identity = GateParams::init(GateKind::GL1, 2).unwrap();
        assert_eq!(
            identity.forward(&t(&[3.0, -2.0])).unwrap().data(),
            &[3.0, -2.0]
        );
        let p = GateParams {
            kind: GateKind::GL1,
            theta: t(&[0.5, 1.0, 2.0]),
        };
        assert_eq!(
            p.forward(&t(&[1.0, 2.0, 3.0])).unwrap().data(),
            &[0.5, 2.0, 6.0]
        );
    }

    #[test]
    fn gl2_at_zero_halves_input() {
        let p = GateParams::init(GateKind::GL2, 2).unwrap();
        assert_eq!(p.forward(&t(&[2.0, 4.0])).unwrap().data(), &[1.0, 2.0]);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let p = GateParams::init(GateKind::GL1, 3).unwrap();
        assert!(matches!(
            p.forward(&t(&[1.0, 2.0])),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn kinds_serialize_lowercase() {
        assert_eq!(serde_json::to_string(&GateKind::GL2).unwrap(), "\"gl2\"");
        assert_eq!(
            serde_json::from_str::<GateKind>("\"GL1\"").unwrap(),
            GateKind::GL1
        );
    }

    proptest! {
        #[test]
        fn output_shape_matches_input(rows in 1usize..5, cols in 1usize..9, gl2 in any::<bool>(), seed in any::<u64>()) {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let kind = if gl2 { GateKind::GL2 } else { GateKind::GL1 };
            let p = GateParams { kind, theta: Tensor::uniform(&[cols], -3.0, 3.0, &mut rng).unwrap() };
            let x = Tensor::uniform(&[rows, cols], -1.0, 1.0, &mut rng).unwrap();
            let y = p.forward(&x).unwrap();
            prop_assert_eq!(y.shape(), x.shape());
        }

        #[test]
        fn gl2_gates_are_strictly_inside_unit_interval(theta in prop::collection::vec(-1e6f64..1e6, 1..16)) {
            let p = GateParams { kind: GateKind::GL2, theta: Tensor::vector(theta).unwrap() };
            prop_assert!(p.effective().data().iter().all(|&v| v > 0.0 && v < 1.0));
        }
    }
}
