//! Builtin test inputs with closed-form coefficient norms.
//!
//! Block `l ≥ 1` carries `exp(log_norm(λ_l^{1/ν}, λ_l))` in its first entry
//! (the zonal harmonic on the sphere) and zeros elsewhere; block 0 is `1`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff::CoeffArray;
use crate::error::{Error, Result};
use crate::spectral::Spectrum;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", content = "params", rename_all = "snake_case", deny_unknown_fields)]
pub enum Builtin {
    /// `exp(-a x)`.
    Poisson { a: f64 },
    /// `exp(-a x^{1/s})`.
    GevreyDecay { a: f64, s: f64 },
    /// `exp(-b log²(1 + λ))`: faster than any power, slower than any Gevrey rate.
    Subgevrey { b: f64 },
    /// `exp(a √x)`.
    DualGrowth { a: f64 },
    /// `exp(-x log(1 + x))`.
    SuperExponential,
    Zero,
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Poisson { .. } => "poisson",
            Builtin::GevreyDecay { .. } => "gevrey_decay",
            Builtin::Subgevrey { .. } => "subgevrey",
            Builtin::DualGrowth { .. } => "dual_growth",
            Builtin::SuperExponential => "super_exponential",
            Builtin::Zero => "zero",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let params: Vec<f64> = match *self {
            Builtin::Poisson { a } | Builtin::DualGrowth { a } => vec![a],
            Builtin::GevreyDecay { a, s } => vec![a, s],
            Builtin::Subgevrey { b } => vec![b],
            Builtin::SuperExponential | Builtin::Zero => vec![],
        };
        if params.iter().all(|p| p.is_finite() && *p > 0.0) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("{} parameters must be positive", self.name())))
        }
    }

    /// `log ‖v_l‖` at `x = λ^{1/ν}`.
    pub fn log_norm(&self, x: f64, lambda: f64) -> f64 {
        match *self {
            Builtin::Poisson { a } => -a * x,
            Builtin::GevreyDecay { a, s } => -a * x.powf(1.0 / s),
            Builtin::Subgevrey { b } => -b * lambda.ln_1p().powi(2),
            Builtin::DualGrowth { a } => a * x.sqrt(),
            Builtin::SuperExponential => -x * x.ln_1p(),
            Builtin::Zero => f64::NEG_INFINITY,
        }
    }

    pub fn coefficients(&self, spectrum: Arc<Spectrum>) -> Result<CoeffArray> {
        self.validate()?;
        let s = Arc::clone(&spectrum);
        let zero = *self == Builtin::Zero;
        CoeffArray::leading(spectrum, |l| {
            let v = match l {
                0 if zero => 0.0,
                0 => 1.0,
                _ => self.log_norm(s.root(l), s.lambda(l)).exp(),
            };
            Complex64::new(v, 0.0)
        })
    }
}
