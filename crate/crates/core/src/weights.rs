//! Weight sequences `M_k`, the structural conditions placed on them, and the
//! associated function `M(r) = sup_k log(r^{νk} / M_{νk})`.
//!
//! Everything is carried in log space: a table stores `log M_k`, never `M_k`.
//! Conditions are checked over a finite horizon, so every verdict here is a
//! statement about the indices actually inspected.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

/// Horizon used for closed-form Gevrey weights. Comfortably above the
/// maximizing index of `M(r)` for `r ≤ 10^6`.
pub const DEFAULT_GEVREY_HORIZON: usize = 1 << 24;

/// Number of consecutive decreasing terms after which the supremum scan stops.
pub const STALL_WINDOW: usize = 8;

/// Slope (per unit `ln k`) of the tail increments above which a log-residual
/// is treated as superlinear, i.e. not dominated by any geometric sequence.
pub const GROWTH_SLOPE_TOLERANCE: f64 = 0.1;

const FIT_HORIZON: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Roumieu,
    Beurling,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightKind {
    /// `M_k = (k!)^s`.
    Gevrey { s: f64 },
    /// Explicit table of `log M_k`, `k = 0..len`.
    Tabulated { log_values: Vec<f64> },
}

/// A weight sequence together with fitted stability constants `A, H ≥ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightSequence {
    kind: WeightKind,
    horizon: usize,
    a: f64,
    h: f64,
    variant: Variant,
    log_convex: bool,
}

impl WeightSequence {
    pub fn gevrey(s: f64, variant: Variant) -> Result<Self> {
        Self::gevrey_with_horizon(s, DEFAULT_GEVREY_HORIZON, variant)
    }

    pub fn gevrey_with_horizon(s: f64, horizon: usize, variant: Variant) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidArgument(format!("gevrey order must be positive, got {s}")));
        }
        Self::accept(WeightKind::Gevrey { s }, horizon, variant, true)
    }

    /// Builds a tabulated weight from `log M_k` values.
    pub fn tabulated(log_values: Vec<f64>, variant: Variant) -> Result<Self> {
        if log_values.is_empty() {
            return Err(Error::HorizonTooSmall { needed: 0, available: 0 });
        }
        if let Some(index) = log_values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonpositiveWeight { index });
        }
        let horizon = log_values.len() - 1;
        let log_convex = log_values
            .windows(3)
            .all(|w| w[2] - w[1] >= w[1] - w[0] - 1e-12 * (1.0 + w[1].abs()));
        Self::accept(WeightKind::Tabulated { log_values }, horizon, variant, log_convex)
    }

    /// Builds a tabulated weight from raw positive values `M_k`.
    pub fn from_values(values: &[f64], variant: Variant) -> Result<Self> {
        let logs = values
            .iter()
            .enumerate()
            .map(|(index, &v)| if v > 0.0 && v.is_finite() { Ok(v.ln()) } else { Err(Error::NonpositiveWeight { index }) })
            .collect::<Result<Vec<_>>>()?;
        Self::tabulated(logs, variant)
    }

    fn accept(kind: WeightKind, horizon: usize, variant: Variant, log_convex: bool) -> Result<Self> {
        let mut w = WeightSequence { kind, horizon, a: 1.0, h: 1.0, variant, log_convex };
        let k_fit = FIT_HORIZON.min(horizon / 2);
        if k_fit < 2 {
            return Err(Error::HorizonTooSmall { needed: 4, available: horizon });
        }
        let report = verify_conditions(&w, k_fit)?;
        if !report.stability.pass || !report.moderate_growth.pass {
            return Err(Error::WeightRejected(format!(
                "no stability constants found over k <= {k_fit} (stability pass: {}, moderate growth pass: {})",
                report.stability.pass, report.moderate_growth.pass
            )));
        }
        w.a = report.stability.log_a.max(report.moderate_growth.log_a).exp();
        w.h = report.stability.log_h.max(report.moderate_growth.log_h).exp();
        Ok(w)
    }

    pub fn kind(&self) -> &WeightKind {
        &self.kind
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Fitted constant `A`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Fitted constant `H`.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn is_log_convex(&self) -> bool {
        self.log_convex
    }

    /// `log M_n` at an integer index.
    pub fn log_m(&self, n: usize) -> Result<f64> {
        if n > self.horizon {
            return Err(Error::HorizonTooSmall { needed: n, available: self.horizon });
        }
        Ok(match &self.kind {
            WeightKind::Gevrey { s } => s * ln_factorial(n as u64),
            WeightKind::Tabulated { log_values } => log_values[n],
        })
    }

    /// `log M_x` at a real index, interpolated linearly in log space between
    /// the neighbouring integer nodes.
    pub fn log_m_at(&self, x: f64) -> Result<f64> {
        if x.is_nan() || x < 0.0 {
            return Err(Error::InvalidArgument(format!("weight index must be nonnegative, got {x}")));
        }
        let lo = x.floor();
        let frac = x - lo;
        let lo = lo as usize;
        if frac == 0.0 {
            return self.log_m(lo);
        }
        let a = self.log_m(lo)?;
        let b = self.log_m(lo + 1)?;
        Ok(a + frac * (b - a))
    }

    fn term(&self, nu: f64, ln_r: f64, k: usize) -> Result<f64> {
        let idx = nu * k as f64;
        Ok(idx * ln_r - self.log_m_at(idx)?)
    }

    /// The associated function `M(r) = sup_k (νk log r − log M_{νk})`.
    pub fn associated_function(&self, nu: f64, r: f64) -> Result<f64> {
        self.associated_function_with_argmax(nu, r).map(|(m, _)| m)
    }

    /// Like [`associated_function`](Self::associated_function), also returning the maximizing `k`.
    pub fn associated_function_with_argmax(&self, nu: f64, r: f64) -> Result<(f64, usize)> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::InvalidArgument(format!("operator order must be positive, got {nu}")));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::InvalidArgument(format!("M(r) needs r > 0, got {r}")));
        }
        let ln_r = r.ln();
        let k_max = (self.horizon as f64 / nu).floor() as usize;
        if k_max < 1 {
            return Err(Error::HorizonTooSmall { needed: nu.ceil() as usize, available: self.horizon });
        }
        if self.log_convex {
            self.sup_concave(nu, ln_r, k_max, r)
        } else {
            self.sup_scan(nu, ln_r, k_max, r)
        }
    }

    // Log-convex weights make the terms concave in k, so the sign of the
    // increment changes at most once and bisection finds the same maximizer
    // as the upward scan.
    fn sup_concave(&self, nu: f64, ln_r: f64, k_max: usize, r: f64) -> Result<(f64, usize)> {
        let inc = |k: usize| -> Result<f64> { Ok(self.term(nu, ln_r, k + 1)? - self.term(nu, ln_r, k)?) };
        if inc(k_max - 1)? >= 0.0 {
            return Err(Error::DivergentSupremum { r, horizon: self.horizon });
        }
        let (mut lo, mut hi) = (0usize, k_max - 1);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if inc(mid)? < 0.0 {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let t0 = self.term(nu, ln_r, 0)?;
        let best = self.term(nu, ln_r, lo)?;
        Ok(if best >= t0 { (best, lo) } else { (t0, 0) })
    }

    fn sup_scan(&self, nu: f64, ln_r: f64, k_max: usize, r: f64) -> Result<(f64, usize)> {
        let mut prev = self.term(nu, ln_r, 0)?;
        let (mut best, mut arg) = (prev, 0);
        let mut decreasing = 0;
        let mut last_step_up = false;
        for k in 1..=k_max {
            let t = self.term(nu, ln_r, k)?;
            if t > best {
                best = t;
                arg = k;
            }
            if t < prev {
                decreasing += 1;
                last_step_up = false;
                if decreasing >= STALL_WINDOW {
                    return Ok((best, arg));
                }
            } else {
                decreasing = 0;
                last_step_up = true;
            }
            prev = t;
        }
        if last_step_up {
            return Err(Error::DivergentSupremum { r, horizon: self.horizon });
        }
        Ok((best, arg))
    }

    /// Sup of `λ^q exp(−δ M(L λ^{1/ν}))` over `lambdas`, with a flag telling
    /// whether the running supremum stopped growing over the last quarter.
    pub fn bounded_ratio_check(&self, nu: f64, q: f64, delta: f64, l: f64, lambdas: &[f64]) -> Result<RatioBound> {
        if lambdas.is_empty() {
            return Err(Error::InvalidArgument("empty eigenvalue list".into()));
        }
        let mut running = Vec::with_capacity(lambdas.len());
        let (mut sup, mut argmax) = (f64::NEG_INFINITY, 0);
        for (i, &lam) in lambdas.iter().enumerate() {
            let v = lam.powf(q) * (-delta * self.associated_function(nu, l * lam.powf(1.0 / nu))?).exp();
            if v > sup {
                sup = v;
                argmax = i;
            }
            running.push(sup);
        }
        let cut = (3 * lambdas.len()) / 4;
        let stabilized = cut == 0 || running[lambdas.len() - 1] <= running[cut.max(1) - 1];
        Ok(RatioBound { sup, argmax, stabilized })
    }

    /// Numerically fits `(c, log A')` with `2 M(r) ≤ M(c r) + log A'` on `r_grid`.
    ///
    /// `c` is the smallest factor on a ratio-1.01 geometric ladder for which
    /// `2M(r) − M(cr)` stops growing over the last quarter of the grid.
    pub fn fit_doubling(&self, nu: f64, r_grid: &[f64]) -> Result<DoublingFit> {
        if r_grid.len() < 4 {
            return Err(Error::InvalidArgument("doubling fit needs at least 4 grid points".into()));
        }
        let m: Vec<f64> = r_grid.iter().map(|&r| self.associated_function(nu, r)).collect::<Result<_>>()?;
        let cut = (3 * r_grid.len()) / 4;
        for i in 0..=700 {
            let c = 1.01f64.powi(i);
            let g: Vec<f64> = r_grid
                .iter()
                .zip(&m)
                .map(|(&r, &mr)| Ok(2.0 * mr - self.associated_function(nu, c * r)?))
                .collect::<Result<_>>()?;
            let head = g[..cut].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let tail = g[cut..].iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if tail <= head + 1e-9 * (1.0 + head.abs()) {
                return Ok(DoublingFit { factor: c, log_const: head.max(tail).max(0.0), bounded: true });
            }
        }
        Ok(DoublingFit { factor: f64::NAN, log_const: f64::NAN, bounded: false })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RatioBound {
    pub sup: f64,
    pub argmax: usize,
    pub stabilized: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DoublingFit {
    pub factor: f64,
    pub log_const: f64,
    pub bounded: bool,
}

/// Result of fitting `c_k ≤ log A + k log H` for a log-residual sequence `c_k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub pass: bool,
    pub log_a: f64,
    pub log_h: f64,
    /// Least-squares slope of the tail increments against `ln(k+1)`.
    pub tail_slope: f64,
    pub first_violation: Option<usize>,
}

impl PowerFit {
    pub fn a(&self) -> f64 {
        self.log_a.exp()
    }
    pub fn h(&self) -> f64 {
        self.log_h.exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridConstant {
    pub l: f64,
    pub log_c: f64,
    /// The residual peaked strictly inside the horizon.
    pub resolved: bool,
}

/// "For every `l` there is `C_l`": decided from the tail trend of the increments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FactorialBoundAll {
    pub pass: bool,
    pub tail_slope: f64,
    pub grid: Vec<GridConstant>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub horizon: usize,
    /// `M_0 = 1`.
    pub normalized: bool,
    /// `M_{k+1} ≤ A H^k M_k`.
    pub stability: PowerFit,
    /// `M_n ≤ A H^n min_q M_q M_{n−q}`, `n ≤ 2·horizon`.
    pub moderate_growth: PowerFit,
    /// `k! ≤ C_l l^k M_k` for some `l` (here `log_h` holds `log l`, `log_a` holds `log C_l`).
    pub factorial_bound: PowerFit,
    /// `k! ≤ C_l l^k M_k` for every `l`.
    pub factorial_bound_all: FactorialBoundAll,
}

impl ConditionReport {
    /// All conditions required by the given variant.
    pub fn passes(&self, variant: Variant) -> bool {
        let base = self.normalized && self.stability.pass && self.moderate_growth.pass;
        match variant {
            Variant::Roumieu => base && self.factorial_bound.pass,
            Variant::Beurling => base && self.factorial_bound_all.pass,
        }
    }
}

fn tail_increment_slope(c: &[f64]) -> f64 {
    if c.len() < 3 {
        return 0.0;
    }
    let inc: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    let start = inc.len() / 2;
    let pts: Vec<(f64, f64)> = (start..inc.len()).map(|k| (((k + 1) as f64).ln(), inc[k])).collect();
    if pts.len() < 2 {
        return 0.0;
    }
    crate::stats::ls_slope(&pts)
}

fn fit_power_bound(c: &[f64], unit_floor: bool) -> PowerFit {
    let slope = tail_increment_slope(c);
    let inc: Vec<f64> = c.windows(2).map(|w| w[1] - w[0]).collect();
    let floor = |v: f64| if unit_floor { v.max(0.0) } else { v };
    let max_of = |s: &[f64]| s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let residual_max = |log_h: f64, upto: usize| {
        c[..upto].iter().enumerate().map(|(k, &ck)| ck - k as f64 * log_h).fold(f64::NEG_INFINITY, f64::max)
    };
    if inc.is_empty() {
        let log_a = floor(c.first().copied().unwrap_or(0.0));
        return PowerFit { pass: true, log_a, log_h: floor(0.0), tail_slope: slope, first_violation: None };
    }
    if slope <= GROWTH_SLOPE_TOLERANCE {
        let log_h = floor(max_of(&inc[inc.len() / 2..]));
        let log_a = floor(residual_max(log_h, c.len()));
        PowerFit { pass: true, log_a, log_h, tail_slope: slope, first_violation: None }
    } else {
        let head = (inc.len() / 2).max(1);
        let log_h = floor(max_of(&inc[..head]));
        let log_a = floor(residual_max(log_h, head + 1));
        let first_violation = c
            .iter()
            .enumerate()
            .position(|(k, &ck)| ck - k as f64 * log_h - log_a > 1e-12 * (1.0 + ck.abs()));
        PowerFit { pass: false, log_a, log_h, tail_slope: slope, first_violation }
    }
}

/// Checks the structural conditions on `w` over `k ≤ k_max` (and `n ≤ 2·k_max`
/// for the moderate-growth condition).
pub fn verify_conditions(w: &WeightSequence, k_max: usize) -> Result<ConditionReport> {
    if k_max < 2 {
        return Err(Error::InvalidArgument(format!("k_max must be at least 2, got {k_max}")));
    }
    if 2 * k_max > w.horizon() {
        return Err(Error::HorizonTooSmall { needed: 2 * k_max, available: w.horizon() });
    }
    let lm: Vec<f64> = (0..=2 * k_max).map(|n| w.log_m(n)).collect::<Result<_>>()?;

    let normalized = lm[0].abs() <= 1e-12;

    let stab: Vec<f64> = (0..=k_max).map(|k| lm[k + 1] - lm[k]).collect();
    let stability = fit_power_bound(&stab, true);

    let growth: Vec<f64> = (0..=2 * k_max)
        .map(|n| {
            let min = (0..=n).map(|q| lm[q] + lm[n - q]).fold(f64::INFINITY, f64::min);
            lm[n] - min
        })
        .collect();
    let moderate_growth = fit_power_bound(&growth, true);

    let fact: Vec<f64> = (0..=k_max).map(|k| ln_factorial(k as u64) - lm[k]).collect();
    let factorial_bound = fit_power_bound(&fact, false);

    let all_slope = tail_increment_slope(&fact);
    let grid = [1.0, 0.1, 0.01, 0.001]
        .iter()
        .map(|&l: &f64| {
            let (arg, log_c) = fact
                .iter()
                .enumerate()
                .map(|(k, &ck)| (k, ck - k as f64 * l.ln()))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            GridConstant { l, log_c, resolved: arg + 1 < fact.len() }
        })
        .collect();
    let factorial_bound_all =
        FactorialBoundAll { pass: all_slope < -GROWTH_SLOPE_TOLERANCE, tail_slope: all_slope, grid };

    Ok(ConditionReport { horizon: k_max, normalized, stability, moderate_growth, factorial_bound, factorial_bound_all })
}
