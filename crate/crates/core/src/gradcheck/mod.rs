//! Central-difference verification of analytic gradients.

mod suite;

pub use suite::{run_suite, SuiteCase, SuiteReport, SUITE_CASES};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, OpKind};
use crate::params::ParamSet;

/// Denominator floor for the relative error, so entries whose true gradient
/// is essentially zero are judged on absolute difference instead.
pub const RELATIVE_FLOOR: f64 = 1e-6;

#[derive(Clone, Debug)]
pub struct GradCheckConfig {
    pub step: f64,
    pub tolerance: f64,
    /// Corrupt one backward rule in the analytic pass.
    pub fault: Option<OpKind>,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            step: 1e-5,
            tolerance: 1e-4,
            fault: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub max_abs_diff: f64,
    pub max_rel_diff: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GradReport {
    pub params: Vec<ParamCheck>,
    pub tolerance: f64,
    pub passed: bool,
}

impl GradReport {
    pub fn max_rel_diff(&self) -> f64 {
        self.params
            .iter()
            .map(|p| p.max_rel_diff)
            .fold(0.0, f64::max)
    }
}

pub fn relative_diff(analytic: f64, numeric: f64) -> f64 {
    let denom = analytic.abs().max(numeric.abs()).max(RELATIVE_FLOOR);
    (analytic - numeric).abs() / denom
}

/// Compares the analytic gradient of the scalar built by `build` against
/// `(f(x+h) − f(x−h)) / 2h` for every entry of every parameter in `params`.
///
/// `build` receives a fresh graph and the (possibly perturbed) parameters and
/// must register each of them with [`Graph::param`] under its own name.
pub fn finite_diff_check<F>(
    params: &ParamSet,
    cfg: &GradCheckConfig,
    build: F,
) -> Result<GradReport>
where
    F: Fn(&mut Graph, &ParamSet) -> Result<NodeId>,
{
    if cfg.step.is_nan() || cfg.step <= 0.0 {
        return Err(Error::Config(format!(
            "step must be positive, got {}",
            cfg.step
        )));
    }
    if params.iter().any(|(_, t)| !t.is_finite()) {
        return Err(Error::Contract(
            "gradient check needs finite parameters".into(),
        ));
    }

    let mut g = Graph::new();
    if let Some(kind) = cfg.fault {
        g.inject_fault(kind);
    }
    let loss = build(&mut g, params)?;
    let analytic = g.backward(loss)?;

    let eval = |p: &ParamSet| -> Result<f64> {
        let mut g = Graph::new();
        let l = build(&mut g, p)?;
        Ok(g.value(l).data()[0])
    };

    let mut work = params.clone();
    let mut checks = Vec::with_capacity(params.len());
    for (name, tensor) in params.iter() {
        let grad = analytic.get(name).ok_or_else(|| {
            Error::Lookup(format!(
                "parameter '{name}' was not registered by the graph"
            ))
        })?;
        let mut max_abs: f64 = 0.0;
        let mut max_rel: f64 = 0.0;
        for i in 0..tensor.len() {
            let orig = tensor.data()[i];
            work.get_mut(name)?.data_mut()[i] = orig + cfg.step;
            let plus = eval(&work)?;
            work.get_mut(name)?.data_mut()[i] = orig - cfg.step;
            let minus = eval(&work)?;
            work.get_mut(name)?.data_mut()[i] = orig;

            let numeric = (plus - minus) / (2.0 * cfg.step);
            let a = grad.data()[i];
            max_abs = max_abs.max((a - numeric).abs());
            max_rel = max_rel.max(relative_diff(a, numeric));
        }
        checks.push(ParamCheck {
            name: name.to_string(),
            max_abs_diff: max_abs,
            max_rel_diff: max_rel,
        });
    }
    let passed = checks.iter().all(|c| c.max_rel_diff <= cfg.tolerance);
    Ok(GradReport {
        params: checks,
        tolerance: cfg.tolerance,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::Tensor;

    fn quadratic_params() -> ParamSet {
        let mut p = ParamSet::new();
        p.insert(
            "w",
            Tensor::matrix(2, 3, vec![0.3, -0.2, 0.9, 0.1, 0.5, -0.7]).unwrap(),
        );
        p.insert("x", Tensor::vector(vec![0.4, -0.6, 0.25]).unwrap());
        p
    }

    fn build(g: &mut Graph, p: &ParamSet) -> Result<NodeId> {
        let w = g.param("w", p.get("w")?.clone());
        let x = g.param("x", p.get("x")?.clone());
        let y = g.linear(x, w, None)?;
        let t = g.tanh(y);
        let sq = g.mul(t, t)?;
        Ok(g.sum(sq))
    }

    #[test]
    fn composite_graph_passes() {
        let report =
            finite_diff_check(&quadratic_params(), &GradCheckConfig::default(), build).unwrap();
        assert!(report.passed, "{report:?}");
        assert_eq!(report.params.len(), 2);
    }

    #[test]
    fn corrupted_rule_fails() {
        let cfg = GradCheckConfig {
            fault: Some(OpKind::Tanh),
            ..Default::default()
        };
        let report = finite_diff_check(&quadratic_params(), &cfg, build).unwrap();
        assert!(!report.passed);
        assert!(report.max_rel_diff() > cfg.tolerance);
    }

    #[test]
    fn rejects_nonpositive_step() {
        let cfg = GradCheckConfig {
            step: 0.0,
            ..Default::default()
        };
        assert!(finite_diff_check(&quadratic_params(), &cfg, build).is_err());
    }
}
