//! Run configuration read from a JSON file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::catalog::Builtin;
use crate::coeff::{DecayClass, LGrid, DEFAULT_TOLERANCE};
use crate::error::{Error, Result};
use crate::spectral::{Manifold, QuadratureSize};
use crate::tensor::SampledOperator;
use crate::weights::{Variant, WeightKind, WeightSequence};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub manifold: Manifold,
    #[serde(rename = "J")]
    pub j: usize,
    /// Defaults to the smallest exact grid.
    #[serde(default)]
    pub quadrature_size: Option<QuadratureSize>,
    #[serde(default = "default_weight")]
    pub weight: WeightKind,
    #[serde(default = "default_variant")]
    pub variant: Variant,
    #[serde(default, rename = "L_grid")]
    pub l_grid: LGrid,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Classes tested by `classify`; all of them when absent.
    #[serde(default)]
    pub classes: Option<Vec<DecayClass>>,
    #[serde(default)]
    pub input: Option<InputSpec>,
    #[serde(default)]
    pub tensor_blocks: Option<TensorBlocks>,
    #[serde(default)]
    pub operator: Option<OperatorSpec>,
    /// Exponents for the summability probe; `[n/ν + 0.2, n/ν]` when absent.
    #[serde(default)]
    pub summability_q: Option<Vec<f64>>,
    /// Number of eigenvalues used by the Weyl and summability diagnostics,
    /// which need no quadrature and can run far beyond `J`.
    #[serde(default, rename = "spectral_J")]
    pub spectral_j: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InputSpec {
    Builtin(Builtin),
    CoeffFile { coeff_file: PathBuf },
    SampleFile { sample_file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorBlocks {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "J")]
    pub j: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OperatorSpec {
    Named(String),
    Multiply { multiply: MultiplySpec },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiplySpec {
    pub g: String,
}

fn default_weight() -> WeightKind {
    WeightKind::Gevrey { s: 1.0 }
}

fn default_variant() -> Variant {
    Variant::Roumieu
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

impl RunConfig {
    /// Small circle model used by `verify` when no file is given.
    pub fn default_verify() -> Self {
        RunConfig {
            manifold: Manifold::Circle,
            j: 32,
            quadrature_size: None,
            weight: default_weight(),
            variant: default_variant(),
            l_grid: LGrid::default(),
            tolerance: DEFAULT_TOLERANCE,
            classes: None,
            input: None,
            tensor_blocks: None,
            operator: None,
            summability_q: None,
            spectral_j: None,
            out_dir: None,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(&fs::read_to_string(path)?)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.j == 0 {
            return bad("J must be positive".into());
        }
        match self.quadrature_size {
            Some(QuadratureSize::Uniform(0)) => return bad("quadrature_size must be positive".into()),
            Some(QuadratureSize::Product([a, b])) if a == 0 || b == 0 => {
                return bad("quadrature_size must be positive".into())
            }
            _ => {}
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad(format!("tolerance must be positive, got {}", self.tolerance));
        }
        self.l_grid.values()?;
        if let Some(q) = &self.summability_q {
            if q.iter().any(|&q| !(q.is_finite() && q > 0.0)) {
                return bad("summability_q entries must be positive".into());
            }
        }
        if self.spectral_j == Some(0) {
            return bad("spectral_J must be positive".into());
        }
        if let Some(TensorBlocks { k, j }) = self.tensor_blocks {
            if k == 0 || j == 0 || k > self.j || j > self.j {
                return bad(format!("tensor_blocks K={k}, J={j} must lie in 1..={}", self.j));
            }
        }
        if let Some(InputSpec::Builtin(b)) = &self.input {
            b.validate()?;
        }
        if let Some(op) = &self.operator {
            op.resolve()?;
        }
        Ok(())
    }

    pub fn weight_sequence(&self) -> Result<WeightSequence> {
        match &self.weight {
            WeightKind::Gevrey { s } => WeightSequence::gevrey(*s, self.variant),
            WeightKind::Tabulated { log_values } => WeightSequence::tabulated(log_values.clone(), self.variant),
        }
    }

    pub fn tensor_blocks(&self) -> TensorBlocks {
        self.tensor_blocks.unwrap_or(TensorBlocks { k: self.j, j: self.j })
    }

    pub fn spectral_j(&self) -> usize {
        self.spectral_j.unwrap_or(self.j)
    }

    pub fn classes(&self) -> Vec<DecayClass> {
        self.classes.clone().unwrap_or_else(|| DecayClass::ALL.to_vec())
    }
}

impl OperatorSpec {
    pub fn resolve(&self) -> Result<Box<dyn SampledOperator>> {
        match self {
            OperatorSpec::Named(name) => crate::tensor::operator_by_name(name),
            OperatorSpec::Multiply { multiply } if multiply.g == "cos" => crate::tensor::operator_by_name("multiply_cos"),
            OperatorSpec::Multiply { multiply } => {
                Err(Error::InvalidArgument(format!("unsupported multiplier g = {:?}; only \"cos\"", multiply.g)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<RunConfig> {
        let c: RunConfig = serde_json::from_str(s)?;
        c.validate()?;
        Ok(c)
    }

    #[test]
    fn minimal_config_fills_defaults() {
        let c = parse(r#"{"manifold": "circle", "J": 4}"#).unwrap();
        assert_eq!(c.weight, WeightKind::Gevrey { s: 1.0 });
        assert_eq!(c.variant, Variant::Roumieu);
        assert_eq!(c.l_grid, LGrid::default());
        assert_eq!(c.tensor_blocks(), TensorBlocks { k: 4, j: 4 });
    }

    #[test]
    fn inputs_and_operators_parse() {
        let c = parse(
            r#"{"manifold": "circle", "J": 8, "input": {"builtin": "poisson", "params": {"a": 0.5}},
                "operator": {"multiply": {"g": "cos"}}, "weight": {"kind": "tabulated", "log_values": [0, 0, 0]}}"#,
        )
        .unwrap();
        assert_eq!(c.input, Some(InputSpec::Builtin(Builtin::Poisson { a: 0.5 })));
        assert_eq!(c.operator.unwrap().resolve().unwrap().name(), "multiply_cos");
        let c = parse(r#"{"manifold": "sphere2", "J": 3, "input": {"sample_file": "s.json"}, "operator": "derivative"}"#).unwrap();
        assert!(matches!(c.input, Some(InputSpec::SampleFile { .. })));
        let c = parse(r#"{"manifold": "circle", "J": 3, "input": {"builtin": "zero"}}"#).unwrap();
        assert_eq!(c.input, Some(InputSpec::Builtin(Builtin::Zero)));
    }

    #[test]
    fn invalid_configs_rejected() {
        for s in [
            r#"{"manifold": "circle", "J": 0}"#,
            r#"{"manifold": "circle", "J": 4, "tolerance": -1}"#,
            r#"{"manifold": "circle", "J": 4, "variant": "neither"}"#,
            r#"{"manifold": "circle", "J": 4, "L_grid": {"min": 0, "max": 1, "points": 3}}"#,
            r#"{"manifold": "circle", "J": 4, "input": {"builtin": "poisson", "params": {"a": -1}}}"#,
            r#"{"manifold": "circle", "J": 4, "input": {"builtin": "nonesuch"}}"#,
            r#"{"manifold": "circle", "J": 4, "operator": "curl"}"#,
            r#"{"manifold": "circle", "J": 4, "tensor_blocks": {"K": 5, "J": 1}}"#,
            r#"{"manifold": "circle", "J": 4, "colour": "red"}"#,
        ] {
            assert!(parse(s).is_err(), "{s}");
        }
    }
}
