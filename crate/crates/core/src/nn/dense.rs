use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bind_tensor, glorot_bound};
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Linear,
    Softmax,
}

/// Fully connected layer `activation(W·x + b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseParams {
    pub weight: Tensor,
    pub bias: Tensor,
    pub activation: Activation,
}

#[derive(Clone, Copy, Debug)]
pub struct DenseNodes {
    pub weight: NodeId,
    pub bias: NodeId,
    pub activation: Activation,
}

impl DenseParams {
    pub fn new(weight: Tensor, bias: Tensor, activation: Activation) -> Result<Self> {
        if weight.rank() != 2 || bias.shape() != [weight.shape()[0]] {
            return Err(Error::dim("dense", weight.shape(), bias.shape()));
        }
        Ok(DenseParams {
            weight,
            bias,
            activation,
        })
    }

    /// Glorot-uniform weights, zero bias.
    pub fn init<R: Rng + ?Sized>(
        input: usize,
        output: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        let bound = glorot_bound(input, output);
        let weight = Tensor::uniform(&[output, input], -bound, bound, rng)?;
        Self::new(weight, Tensor::zeros(&[output])?, activation)
    }

    pub fn input_dim(&self) -> usize {
        self.weight.shape()[1]
    }

    pub fn output_dim(&self) -> usize {
        self.weight.shape()[0]
    }

    pub fn bind(&self, g: &mut Graph, prefix: &str, trainable: bool) -> DenseNodes {
        DenseNodes {
            weight: bind_tensor(g, &format!("{prefix}.weight"), &self.weight, trainable),
            bias: bind_tensor(g, &format!("{prefix}.bias"), &self.bias, trainable),
            activation: self.activation,
        }
    }

    pub fn visit<'a>(&'a self, prefix: &str, f: &mut dyn FnMut(String, &'a Tensor)) {
        f(format!("{prefix}.weight"), &self.weight);
        f(format!("{prefix}.bias"), &self.bias);
    }

    pub fn visit_mut<'a>(&'a mut self, prefix: &str, f: &mut dyn FnMut(String, &'a mut Tensor)) {
        f(format!("{prefix}.weight"), &mut self.weight);
        f(format!("{prefix}.bias"), &mut self.bias);
    }

    pub fn forward(&self, x: &Tensor) -> Result<Tensor> {
        let mut g = Graph::new();
        let nodes = self.bind(&mut g, "dense", false);
        let xn = g.constant(x.clone());
        let y = dense(&mut g, &nodes, xn)?;
        Ok(g.value(y).clone())
    }
}

pub fn dense(g: &mut Graph, p: &DenseNodes, x: NodeId) -> Result<NodeId> {
    let pre = g.linear(x, p.weight, Some(p.bias))?;
    Ok(match p.activation {
        Activation::Linear => pre,
        Activation::Relu => g.relu(pre),
        Activation::Softmax => g.softmax(pre),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weights_pass_input_through() {
        let p = DenseParams::new(
            Tensor::identity(3).unwrap(),
            Tensor::zeros(&[3]).unwrap(),
            Activation::Linear,
        )
        .unwrap();
        let x = Tensor::vector(vec![1.5, -2.0, 0.25]).unwrap();
        assert_eq!(p.forward(&x).unwrap(), x);
    }

    #[test]
    fn bias_only() {
        let p = DenseParams::new(
            Tensor::zeros(&[2, 4]).unwrap(),
            Tensor::vector(vec![1.0, 2.0]).unwrap(),
            Activation::Linear,
        )
        .unwrap();
        let y = p
            .forward(&Tensor::vector(vec![3.0, 1.0, -4.0, 9.0]).unwrap())
            .unwrap();
        assert_eq!(y.data(), &[1.0, 2.0]);
    }

    #[test]
    fn relu_clamps_negative_preactivations() {
        let p = DenseParams::new(
            Tensor::identity(2).unwrap(),
            Tensor::zeros(&[2]).unwrap(),
            Activation::Relu,
        )
        .unwrap();
        let y = p
            .forward(&Tensor::vector(vec![-1.0, 2.0]).unwrap())
            .unwrap();
        assert_eq!(y.data(), &[0.0, 2.0]);
    }

    #[test]
    fn softmax_output_is_a_distribution() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let p = DenseParams::init(5, 3, Activation::Softmax, &mut rng).unwrap();
        let y = p
            .forward(&Tensor::uniform(&[5], -1.0, 1.0, &mut rng).unwrap())
            .unwrap();
        assert!((y.sum() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_a_dimension_error() {
        let p = DenseParams::new(
            Tensor::identity(2).unwrap(),
            Tensor::zeros(&[2]).unwrap(),
            Activation::Linear,
        )
        .unwrap();
        assert!(matches!(
            p.forward(&Tensor::vector(vec![1.0; 3]).unwrap()),
            Err(Error::Dimension { .. })
        ));
        assert!(DenseParams::new(
            Tensor::identity(2).unwrap(),
            Tensor::zeros(&[3]).unwrap(),
            Activation::Linear
        )
        .is_err());
    }

    use rand::SeedableRng;
}
