//! Envelope tests for the decay and growth classes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CoeffArray;
use crate::error::{Error, Result};
use crate::stats::ls_slope;
use crate::weights::WeightSequence;

/// Allowed excess, in log units, of the late blocks over the envelope fitted on the early ones.
pub const DEFAULT_TOLERANCE: f64 = 0.5;

/// Bidual terms whose last quarter carries less than this share of the sum count as converged.
pub const BIDUAL_CONVERGENCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayClass {
    Smooth,
    Analytic,
    GevreyRoumieu,
    GevreyBeurling,
    AlphaDualRoumieu,
    AlphaDualBeurling,
}

impl DecayClass {
    pub const ALL: [DecayClass; 6] = [
        DecayClass::Smooth,
        DecayClass::Analytic,
        DecayClass::GevreyRoumieu,
        DecayClass::GevreyBeurling,
        DecayClass::AlphaDualRoumieu,
        DecayClass::AlphaDualBeurling,
    ];

    /// Classes from smallest to largest space; a member of one belongs to all later ones
    /// (analytic and Gevrey–Roumieu coincide for `s = 1`).
    pub const BY_STRENGTH: [DecayClass; 6] = [
        DecayClass::GevreyBeurling,
        DecayClass::Analytic,
        DecayClass::GevreyRoumieu,
        DecayClass::Smooth,
        DecayClass::AlphaDualRoumieu,
        DecayClass::AlphaDualBeurling,
    ];

    /// Whether membership must hold for every `L` on the grid.
    pub fn for_all_l(self) -> bool {
        matches!(self, DecayClass::GevreyBeurling | DecayClass::AlphaDualRoumieu)
    }

    fn is_growth(self) -> bool {
        matches!(self, DecayClass::AlphaDualRoumieu | DecayClass::AlphaDualBeurling)
    }
}

/// Geometric grid of `L` values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LGrid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Default for LGrid {
    /// 24 points per decade over `[0.1, 100]`.
    fn default() -> Self {
        LGrid { min: 0.1, max: 100.0, points: 73 }
    }
}

impl LGrid {
    pub fn new(min: f64, max: f64, points: usize) -> Result<Self> {
        let g = LGrid { min, max, points };
        g.values()?;
        Ok(g)
    }

    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(self.min > 0.0 && self.max >= self.min && self.max.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "L grid needs 0 < min <= max, got [{}, {}]",
                self.min, self.max
            )));
        }
        if self.points == 1 {
            return Ok(vec![self.min]);
        }
        let ratio = (self.max / self.min).ln() / (self.points - 1) as f64;
        Ok((0..self.points).map(|i| self.min * (ratio * i as f64).exp()).collect())
    }

    /// Ratio between neighbouring grid points.
    pub fn step(&self) -> f64 {
        if self.points < 2 {
            1.0
        } else {
            (self.max / self.min).powf(1.0 / (self.points - 1) as f64)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Pass,
    Fail,
    /// Every block with `l ≥ 1` vanishes; the array lies in every class.
    TrivialPass,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridVerdict {
    pub l: f64,
    /// Envelope constant fitted over all blocks.
    pub log_c: f64,
    pub violation: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothFit {
    /// Fitted polynomial decay order on each index quarter.
    pub orders: [f64; 4],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DecayEnvelope {
    pub target: DecayClass,
    pub membership: Membership,
    /// `Some(target)` on a pass, `None` otherwise.
    pub class: Option<DecayClass>,
    pub fitted_l: Option<f64>,
    pub log_c: Option<f64>,
    pub residual: f64,
    pub tolerance: f64,
    pub horizon: usize,
    pub grid: Vec<GridVerdict>,
    pub smooth: Option<SmoothFit>,
}

impl DecayEnvelope {
    pub fn passed(&self) -> bool {
        self.membership != Membership::Fail
    }

    pub fn fitted_c(&self) -> Option<f64> {
        self.log_c.map(f64::exp)
    }

    /// `log C ∓ M(L λ^{1/ν})` at the fitted constants, if any.
    pub fn log_envelope(&self, weight: &WeightSequence, nu: f64, x: f64) -> Result<Option<f64>> {
        let (Some(l), Some(c)) = (self.fitted_l, self.log_c) else { return Ok(None) };
        let sign = if self.target.is_growth() { 1.0 } else { -1.0 };
        Ok(Some(c + sign * exponent(weight, self.target, nu, l * x)?))
    }
}

/// Weight used in the exponent: `M(r)` of the sequence, or `r` itself for the analytic class.
fn exponent(weight: &WeightSequence, target: DecayClass, nu: f64, r: f64) -> Result<f64> {
    if r == 0.0 {
        return Ok(0.0);
    }
    if target == DecayClass::Analytic {
        return Ok(r);
    }
    weight.associated_function(nu, r)
}

struct Profile {
    x: Vec<f64>,
    y: Vec<f64>,
    log_lambda: Vec<f64>,
}

fn profile(u: &CoeffArray) -> Profile {
    let s = u.spectrum();
    let n = u.len().saturating_sub(1);
    let mut p = Profile { x: Vec::with_capacity(n), y: Vec::with_capacity(n), log_lambda: Vec::with_capacity(n) };
    for l in 1..u.len() {
        p.x.push(s.root(l));
        p.y.push(u.log_hs_norm(l));
        p.log_lambda.push(s.lambda(l).ln());
    }
    p
}

fn envelope_at(p: &Profile, weight: &WeightSequence, target: DecayClass, nu: f64, l: f64, tol: f64) -> Result<GridVerdict> {
    let sign = if target.is_growth() { -1.0 } else { 1.0 };
    let head_len = p.y.len().div_ceil(2);
    let mut head = f64::NEG_INFINITY;
    let mut all = f64::NEG_INFINITY;
    for (i, (&x, &y)) in p.x.iter().zip(&p.y).enumerate() {
        if y == f64::NEG_INFINITY {
            continue;
        }
        let r = y + sign * exponent(weight, target, nu, l * x)?;
        all = all.max(r);
        if i < head_len {
            head = head.max(r);
        }
    }
    let violation = if all == f64::NEG_INFINITY { 0.0 } else { (all - head).max(0.0) };
    Ok(GridVerdict { l, log_c: all, violation, feasible: violation <= tol })
}

/// Least-squares decay order of `log ‖u_l‖` against `log λ_l` on each index quarter.
fn smooth_fit(p: &Profile) -> SmoothFit {
    let n = p.y.len();
    let mut orders = [0.0; 4];
    for (q, slot) in orders.iter_mut().enumerate() {
        let (a, b) = (q * n / 4, (q + 1) * n / 4);
        let pts: Vec<(f64, f64)> = (a..b)
            .filter(|&i| p.y[i].is_finite())
            .map(|i| (p.log_lambda[i], p.y[i]))
            .collect();
        *slot = if pts.len() < 2 { f64::INFINITY } else { -ls_slope(&pts) };
    }
    SmoothFit { orders }
}

/// Decides membership of `u` in `target` on a finite `L` grid.
///
/// For each `L` the residuals `log ‖u_l‖ ± M(L λ_l^{1/ν})` (`l ≥ 1`) are
/// capped by their maximum over the first half of the blocks; `L` is feasible
/// when no later block exceeds that cap by more than `tol`. Zero blocks never
/// violate. Existential classes report the largest feasible `L`; universal
/// classes need every grid point feasible. The smooth class instead requires
/// the fitted polynomial order to keep growing across the index quarters.
pub fn classify(u: &CoeffArray, weight: &WeightSequence, target: DecayClass, grid: &LGrid, tol: f64) -> Result<DecayEnvelope> {
    let ls = grid.values()?;
    let nu = u.spectrum().nu();
    let mut env = DecayEnvelope {
        target,
        membership: Membership::TrivialPass,
        class: Some(target),
        fitted_l: None,
        log_c: None,
        residual: 0.0,
        tolerance: tol,
        horizon: u.len(),
        grid: Vec::new(),
        smooth: None,
    };
    if u.is_zero_tail() {
        return Ok(env);
    }
    let p = profile(u);
    if target == DecayClass::Smooth {
        if p.y.len() < 8 {
            return Err(Error::InvalidArgument("smooth test needs at least 8 blocks beyond l = 0".into()));
        }
        let fit = smooth_fit(&p);
        let o = fit.orders;
        let stair = o.windows(2).map(|w| w[0] - w[1]).fold(0.0f64, f64::max);
        let growing = o[3] > 0.0 && o[3] - o[0] >= 1.0;
        env.residual = if growing { stair } else { f64::INFINITY };
        env.smooth = Some(fit);
    } else {
        let verdicts: Vec<GridVerdict> = ls
            .par_iter()
            .map(|&l| envelope_at(&p, weight, target, nu, l, tol))
            .collect::<Result<_>>()?;
        if target.for_all_l() {
            env.residual = verdicts.iter().map(|v| v.violation).fold(0.0, f64::max);
        } else if let Some(best) = verdicts.iter().rev().find(|v| v.feasible) {
            env.residual = best.violation;
            env.fitted_l = Some(best.l);
            env.log_c = Some(best.log_c);
        } else {
            env.residual = verdicts.iter().map(|v| v.violation).fold(f64::INFINITY, f64::min);
        }
        env.grid = verdicts;
    }
    let pass = env.residual <= tol;
    env.membership = if pass { Membership::Pass } else { Membership::Fail };
    env.class = pass.then_some(target);
    Ok(env)
}

/// The first class in [`DecayClass::BY_STRENGTH`] that `u` passes.
pub fn strongest_class(u: &CoeffArray, weight: &WeightSequence, grid: &LGrid, tol: f64) -> Result<Option<DecayClass>> {
    for c in DecayClass::BY_STRENGTH {
        if classify(u, weight, c, grid, tol)?.passed() {
            return Ok(Some(c));
        }
    }
    Ok(None)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BidualReport {
    pub membership: Membership,
    pub found_l: Option<f64>,
    /// Per grid `L`: share of the weighted sum carried by the last quarter.
    pub tail_share: Vec<(f64, f64)>,
}

/// Largest grid `L` for which `Σ exp(M(L λ_l^{1/ν})) ‖w_l‖` looks convergent.
pub fn bidual_membership(w: &CoeffArray, weight: &WeightSequence, grid: &LGrid) -> Result<BidualReport> {
    let ls = grid.values()?;
    if w.is_zero_tail() {
        return Ok(BidualReport { membership: Membership::TrivialPass, found_l: None, tail_share: Vec::new() });
    }
    let p = profile(w);
    let nu = w.spectrum().nu();
    let n = p.y.len();
    let cut = n - n / 4;
    let tail_share: Vec<(f64, f64)> = ls
        .par_iter()
        .map(|&l| -> Result<(f64, f64)> {
            let mut logs = Vec::with_capacity(n);
            for (&x, &y) in p.x.iter().zip(&p.y) {
                logs.push(if y == f64::NEG_INFINITY { y } else { y + weight.associated_function(nu, l * x)? });
            }
            let total = log_sum_exp(&logs);
            let tail = log_sum_exp(&logs[cut..]);
            let share = if tail == f64::NEG_INFINITY { 0.0 } else { (tail - total).exp() };
            Ok((l, share))
        })
        .collect::<Result<_>>()?;
    let found_l = tail_share.iter().rev().find(|(_, s)| *s <= BIDUAL_CONVERGENCE).map(|(l, _)| *l);
    let membership = if found_l.is_some() { Membership::Pass } else { Membership::Fail };
    Ok(BidualReport { membership, found_l, tail_share })
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    m + v.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}
