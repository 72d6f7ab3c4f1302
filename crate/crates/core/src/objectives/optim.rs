use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Gradients;
use crate::tensor::Tensor;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    Sgd,
    #[serde(alias = "rms_prop")]
    RmsProp,
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptimizerKind::Sgd => "sgd",
            OptimizerKind::RmsProp => "rmsprop",
        })
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sgd" => Ok(OptimizerKind::Sgd),
            "rmsprop" | "rms_prop" => Ok(OptimizerKind::RmsProp),
            _ => Err(Error::Config(format!(
                "unknown optimizer '{s}' (expected sgd or rmsprop)"
            ))),
        }
    }
}

fn check_shapes(param: &Tensor, grad: &Tensor) -> Result<()> {
    if param.shape() == grad.shape() {
        Ok(())
    } else {
        Err(Error::dim("optimizer step", param.shape(), grad.shape()))
    }
}

fn slot<'a>(
    map: &'a mut BTreeMap<String, Tensor>,
    name: &str,
    like: &Tensor,
) -> Result<&'a mut Tensor> {
    if !map.contains_key(name) {
        map.insert(name.to_string(), Tensor::zeros(like.shape())?);
    }
    let state = map.get_mut(name).unwrap();
    if state.shape() != like.shape() {
        return Err(Error::dim("optimizer state", state.shape(), like.shape()));
    }
    Ok(state)
}

/// Classical momentum: `v ← μ·v − lr·g`, `p ← p + v`.
#[derive(Clone, Debug)]
pub struct SgdMomentum {
    pub lr: f64,
    pub momentum: f64,
    velocity: BTreeMap<String, Tensor>,
}

impl SgdMomentum {
    pub fn new(lr: f64, momentum: f64) -> Self {
        SgdMomentum {
            lr,
            momentum,
            velocity: BTreeMap::new(),
        }
    }

    pub fn velocity(&self, name: &str) -> Option<&Tensor> {
        self.velocity.get(name)
    }

    pub fn step(&mut self, name: &str, param: &mut Tensor, grad: &Tensor) -> Result<()> {
        check_shapes(param, grad)?;
        let v = slot(&mut self.velocity, name, param)?;
        let (lr, mu) = (self.lr, self.momentum);
        for ((v, p), &g) in v
            .data_mut()
            .iter_mut()
            .zip(param.data_mut())
            .zip(grad.data())
        {
            *v = mu * *v - lr * g;
            *p += *v;
        }
        Ok(())
    }
}

/// `s ← ρ·s + (1−ρ)·g²`, `p ← p − lr·g / (√s + ε)`.
#[derive(Clone, Debug)]
pub struct RmsProp {
    pub lr: f64,
    pub rho: f64,
    pub epsilon: f64,
    mean_square: BTreeMap<String, Tensor>,
}

impl RmsProp {
    pub const DEFAULT_RHO: f64 = 0.9;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(lr: f64, rho: f64, epsilon: f64) -> Self {
        RmsProp {
            lr,
            rho,
            epsilon,
            mean_square: BTreeMap::new(),
        }
    }

    pub fn mean_square(&self, name: &str) -> Option<&Tensor> {
        self.mean_square.get(name)
    }

    pub fn step(&mut self, name: &str, param: &mut Tensor, grad: &Tensor) -> Result<()> {
        check_shapes(param, grad)?;
        let s = slot(&mut self.mean_square, name, param)?;
        let (lr, rho, eps) = (self.lr, self.rho, self.epsilon);
        for ((s, p), &g) in s
            .data_mut()
            .iter_mut()
            .zip(param.data_mut())
            .zip(grad.data())
        {
            *s = rho * *s + (1.0 - rho) * g * g;
            *p -= lr * g / (s.sqrt() + eps);
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub enum Optimizer {
    Sgd(SgdMomentum),
    RmsProp(RmsProp),
}

impl Optimizer {
    /// `momentum` is ignored for RMSProp, which uses the default ρ and ε.
    pub fn new(kind: OptimizerKind, lr: f64, momentum: f64) -> Self {
        match kind {
            OptimizerKind::Sgd => Optimizer::Sgd(SgdMomentum::new(lr, momentum)),
            OptimizerKind::RmsProp => Optimizer::RmsProp(RmsProp::new(
                lr,
                RmsProp::DEFAULT_RHO,
                RmsProp::DEFAULT_EPSILON,
            )),
        }
    }

    pub fn step_one(&mut self, name: &str, param: &mut Tensor, grad: &Tensor) -> Result<()> {
        match self {
            Optimizer::Sgd(o) => o.step(name, param, grad),
            Optimizer::RmsProp(o) => o.step(name, param, grad),
        }
    }

    /// Updates every parameter that has an entry in `grads`; parameters
    /// without one (frozen) are left alone.
    pub fn step<'a, I>(&mut self, params: I, grads: &Gradients) -> Result<()>
    where
        I: IntoIterator<Item = (&'a str, &'a mut Tensor)>,
    {
        for (name, param) in params {
            if let Some(g) = grads.get(name) {
                self.step_one(name, param, g)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(v: f64) -> Tensor {
        Tensor::scalar(v)
    }

    #[test]
    fn vanilla_sgd_step() {
        let mut opt = SgdMomentum::new(0.001, 0.0);
        let mut p = scalar(1.0);
        opt.step("p", &mut p, &scalar(1.0)).unwrap();
        assert_eq!(p.data(), &[0.999]);
    }

    #[test]
    fn momentum_two_steps() {
        let mut opt = SgdMomentum::new(0.1, 0.9);
        let mut p = scalar(0.0);
        opt.step("p", &mut p, &scalar(1.0)).unwrap();
        assert!((p.data()[0] + 0.1).abs() < 1e-15);
        opt.step("p", &mut p, &scalar(1.0)).unwrap();
        assert!((opt.velocity("p").unwrap().data()[0] + 0.19).abs() < 1e-15);
        assert!((p.data()[0] + 0.29).abs() < 1e-15);
    }

    #[test]
    fn momentum_decays_without_gradient() {
        let mut opt = SgdMomentum::new(0.1, 0.9);
        let mut p = scalar(0.0);
        opt.step("p", &mut p, &scalar(1.0)).unwrap();
        let mut prev_v = opt.velocity("p").unwrap().data()[0];
        let mut prev_p = p.data()[0];
        for _ in 0..200 {
            opt.step("p", &mut p, &scalar(0.0)).unwrap();
            let v = opt.velocity("p").unwrap().data()[0];
            assert!((v - 0.9 * prev_v).abs() < 1e-18);
            prev_v = v;
            prev_p = p.data()[0];
        }
        // geometric series: total displacement −0.1 / (1 − 0.9)
        assert!((prev_p + 1.0).abs() < 1e-8, "{prev_p}");
    }

    #[test]
    fn rmsprop_first_step() {
        let mut opt = RmsProp::new(0.001, 0.9, 1e-8);
        let mut p = scalar(0.0);
        opt.step("p", &mut p, &scalar(1.0)).unwrap();
        assert!((opt.mean_square("p").unwrap().data()[0] - 0.1).abs() < 1e-15);
        let expected = -0.001 / (0.1f64.sqrt() + 1e-8);
        assert!((p.data()[0] - expected).abs() < 1e-15);
        assert!((p.data()[0] + 0.0031623).abs() < 1e-7);
    }

    #[test]
    fn rmsprop_zero_gradient_is_a_no_op() {
        let mut opt = RmsProp::new(0.001, 0.9, 1e-8);
        let mut p = scalar(0.42);
        opt.step("p", &mut p, &scalar(0.0)).unwrap();
        assert_eq!(p.data(), &[0.42]);
    }

    #[test]
    fn rmsprop_first_step_barely_depends_on_gradient_scale() {
        let delta = |g: f64| {
            let mut opt = RmsProp::new(0.001, 0.9, 1e-8);
            let mut p = scalar(0.0);
            opt.step("p", &mut p, &scalar(g)).unwrap();
            p.data()[0]
        };
        let (small, large) = (delta(0.5), delta(5.0));
        assert!(((large - small) / small).abs() < 0.01);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let mut opt = Optimizer::new(OptimizerKind::Sgd, 0.1, 0.9);
        let mut p = Tensor::zeros(&[2]).unwrap();
        assert!(matches!(
            opt.step_one("p", &mut p, &Tensor::zeros(&[3]).unwrap()),
            Err(Error::Dimension { .. })
        ));
        let mut opt = Optimizer::new(OptimizerKind::RmsProp, 0.1, 0.0);
        assert!(opt
            .step_one("p", &mut p, &Tensor::zeros(&[1]).unwrap())
            .is_err());
    }

    #[test]
    fn kinds_parse() {
        assert_eq!("sgd".parse::<OptimizerKind>().unwrap(), OptimizerKind::Sgd);
        assert_eq!(
            "rmsprop".parse::<OptimizerKind>().unwrap(),
            OptimizerKind::RmsProp
        );
        assert_eq!(
            serde_json::to_string(&OptimizerKind::RmsProp).unwrap(),
            "\"rmsprop\""
        );
        assert!("adam".parse::<OptimizerKind>().is_err());
    }

    proptest! {
        #[test]
        fn zero_momentum_is_plain_gradient_descent(
            p0 in prop::collection::vec(-5.0f64..5.0, 1..8),
            lr in 1e-4f64..1.0,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut opt = SgdMomentum::new(lr, 0.0);
            let mut p = Tensor::vector(p0).unwrap();
            for _ in 0..3 {
                let g = Tensor::vector((0..p.len()).map(|_| rng.random_range(-2.0..2.0)).collect()).unwrap();
                let expected: Vec<f64> = p.data().iter().zip(g.data()).map(|(&pi, &gi)| pi - lr * gi).collect();
                opt.step("p", &mut p, &g).unwrap();
                prop_assert_eq!(p.data(), expected.as_slice());
            }
        }

        #[test]
        fn rmsprop_first_step_is_bounded_and_opposes_gradient(
            g in prop::collection::vec(prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6], 1..8),
            lr in 1e-5f64..0.1,
        ) {
            let rho = 0.9;
            let mut opt = RmsProp::new(lr, rho, 1e-8);
            let grad = Tensor::vector(g).unwrap();
            let mut p = Tensor::zeros(grad.shape()).unwrap();
            opt.step("p", &mut p, &grad).unwrap();
            let bound = lr / (1.0 - rho).sqrt() * (1.0 + 1e-9);
            for (&dp, &gi) in p.data().iter().zip(grad.data()) {
                prop_assert!(dp.abs() < bound);
                prop_assert!(dp * gi < 0.0);
            }
        }
    }
}
