use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mode {
    Train,
    Eval,
}

fn check_rate(rate: f64) -> Result<()> {
    if (0.0..1.0).contains(&rate) {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "dropout rate must be in [0, 1), got {rate}"
        )))
    }
}

/// Inverted-dropout mask: each entry is 0 with probability `rate`, otherwise
/// `1 / (1 − rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(shape: &[usize], rate: f64, rng: &mut R) -> Result<Tensor> {
    check_rate(rate)?;
    let keep = 1.0 / (1.0 - rate);
    let n = shape.iter().product();
    let data = (0..n)
        .map(|_| {
            if rng.random::<f64>() < rate {
                0.0
            } else {
                keep
            }
        })
        .collect();
    Tensor::new(shape.to_vec(), data)
}

pub fn dropout_apply<R: Rng + ?Sized>(
    x: &Tensor,
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<Tensor> {
    check_rate(rate)?;
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(x.clone());
    }
    x.hadamard(&dropout_mask(x.shape(), rate, rng)?)
}

/// Graph version of [`dropout_apply`]; the mask enters as a constant.
pub fn dropout<R: Rng + ?Sized>(
    g: &mut Graph,
    x: NodeId,
    rate: f64,
    mode: Mode,
    rng: &mut R,
) -> Result<NodeId> {
    check_rate(rate)?;
    if mode == Mode::Eval || rate == 0.0 {
        return Ok(x);
    }
    let mask = dropout_mask(g.shape(x), rate, rng)?;
    let m = g.constant(mask);
    g.mul(x, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_rate_and_eval_are_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Tensor::vector(vec![1.0, -2.0, 3.5]).unwrap();
        assert_eq!(dropout_apply(&x, 0.0, Mode::Train, &mut rng).unwrap(), x);
        for rate in [0.2, 0.5, 0.7] {
            assert_eq!(dropout_apply(&x, rate, Mode::Eval, &mut rng).unwrap(), x);
        }
    }

    #[test]
    fn rate_of_one_is_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let x = Tensor::ones(&[2]).unwrap();
        assert!(matches!(
            dropout_apply(&x, 1.0, Mode::Train, &mut rng),
            Err(Error::Config(_))
        ));
        assert!(dropout_apply(&x, -0.1, Mode::Eval, &mut rng).is_err());
    }

    #[test]
    fn train_mode_preserves_expectation() {
        // 10^5 seeded draws over a vector of ones
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let x = Tensor::ones(&[100_000]).unwrap();
        let y = dropout_apply(&x, 0.3, Mode::Train, &mut rng).unwrap();
        let mean = y.sum() / y.len() as f64;
        let zeros = y.data().iter().filter(|&&v| v == 0.0).count() as f64 / y.len() as f64;
        assert!((mean - 1.0).abs() <= 0.02, "mean {mean}");
        assert!((zeros - 0.3).abs() <= 0.01, "zero fraction {zeros}");
    }
}
