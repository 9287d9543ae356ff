//! Invariant checks shared by `spectra` and `verify`.

use std::collections::BTreeMap;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{finish, Context, Criterion, Outcome, EXIT_FAILURE};
use crate::catalog::Builtin;
use crate::coeff::{duality_equivalence_probe, norm_inequality_check, plancherel_residual, synthesize_nodes, CoeffArray};
use crate::error::Result;
use crate::spectral::{
    summability_probe, weyl_multiplicity_check, Manifold, QuadratureSize, SpectralModel, Spectrum, SummabilityReport,
    Verdict, ORTHONORMALITY_TOLERANCE,
};
use crate::stats::ls_slope;
use crate::tensor::{adjointness_residual, from_basis_action, multiplier_extract, Laplacian, TensorRep};
use crate::weights::{verify_conditions, Variant, WeightKind};

pub(crate) const PLANCHEREL_TOLERANCE: f64 = 1e-8;
pub(crate) const ADJOINTNESS_TOLERANCE: f64 = 1e-12;
pub(crate) const MULTIPLIER_TOLERANCE: f64 = 1e-10;
const GEVREY_SLOPE_TOLERANCE: f64 = 0.05;
const RANDOM_FUNCTIONS: usize = 10;
const NORM_TRIALS: usize = 1000;

pub(crate) fn model_for(ctx: &Context) -> Result<SpectralModel> {
    let cfg = &ctx.config;
    let q = match cfg.quadrature_size {
        Some(q) => q,
        None => QuadratureSize::minimal(&Spectrum::new(cfg.manifold, cfg.j)?),
    };
    SpectralModel::build_unchecked(cfg.manifold, cfg.j, q)
}

pub(crate) fn check_orthonormality(model: &SpectralModel) -> Criterion {
    let r = model.orthonormality_residual();
    Criterion::new(
        "orthonormality",
        r <= ORTHONORMALITY_TOLERANCE,
        format!("Gram residual {r:.3e} (tolerance {ORTHONORMALITY_TOLERANCE:e}) on {:?}", model.quadrature_size()),
    )
}

/// Brute-force `#{m ∈ Z² : |m|² = v}` for every `v ≤ max`.
pub(crate) fn lattice_counts(max: u64) -> BTreeMap<u64, usize> {
    let r = (max as f64).sqrt() as i64 + 1;
    let mut counts = BTreeMap::new();
    for a in -r..=r {
        for b in -r..=r {
            let v = (a * a + b * b) as u64;
            if v <= max {
                *counts.entry(v).or_insert(0) += 1;
            }
        }
    }
    counts
}

pub(crate) fn check_spectrum(spec: &Spectrum) -> Criterion {
    let id = "eigenvalues";
    let lam = spec.lambdas();
    let mults = spec.mults();
    if lam[0] != 0.0 || mults[0] != 1 {
        return Criterion::new(id, false, format!("lambda_0 = {}, d_0 = {}", lam[0], mults[0]));
    }
    if let Some(j) = lam.windows(2).position(|w| w[1] <= w[0]) {
        return Criterion::new(id, false, format!("not strictly increasing at j = {}", j + 1));
    }
    let expected: Vec<(f64, usize)> = match spec.manifold() {
        Manifold::Circle => (0..spec.len()).map(|j| ((j * j) as f64, if j == 0 { 1 } else { 2 })).collect(),
        Manifold::Sphere2 => (0..spec.len()).map(|j| ((j * (j + 1)) as f64, 2 * j + 1)).collect(),
        Manifold::Torus2 => lattice_counts(lam[spec.len() - 1] as u64)
            .into_iter()
            .map(|(v, c)| (v as f64, c))
            .collect(),
    };
    let got: Vec<(f64, usize)> = lam.iter().copied().zip(mults.iter().copied()).collect();
    match got.iter().zip(&expected).position(|(g, e)| g != e) {
        _ if got.len() != expected.len() => {
            Criterion::new(id, false, format!("{} eigenvalues, oracle has {}", got.len(), expected.len()))
        }
        Some(j) => Criterion::new(id, false, format!("j = {j}: got {:?}, oracle {:?}", got[j], expected[j])),
        None => Criterion::new(id, true, format!("{} eigenvalues match the closed form / lattice count", got.len())),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub(crate) struct WeylSummary {
    pub eigenvalues: usize,
    pub exponent: f64,
    pub sup: f64,
    pub argmax: usize,
    /// No increase of the running sup over the last half of the range.
    pub stable: bool,
}

pub(crate) fn check_weyl(spec: &Spectrum) -> (Criterion, WeylSummary) {
    let w = weyl_multiplicity_check(spec);
    let s = WeylSummary { eigenvalues: spec.len(), exponent: w.exponent, sup: w.sup, argmax: w.argmax, stable: w.stable_over(0.5) };
    let c = Criterion::new(
        "weyl_bound",
        s.stable,
        format!("sup d_j/(1+lambda_j)^{} = {} at j = {} over {} eigenvalues", s.exponent, s.sup, s.argmax, s.eigenvalues),
    );
    (c, s)
}

/// Probe verdicts against the threshold `q > n/ν`.
pub(crate) fn check_summability(spec: &Spectrum, qs: Option<&[f64]>) -> (Vec<Criterion>, Vec<SummabilityReport>) {
    let critical = spec.dimension() as f64 / spec.nu();
    let default = [critical + 0.2, critical];
    let qs = qs.unwrap_or(&default);
    let mut criteria = Vec::new();
    let mut reports = Vec::new();
    for &q in qs {
        let id = format!("summability(q={q})");
        match summability_probe(spec, q, spec.len()) {
            Ok(r) => {
                let expect = if q > critical { Verdict::Converged } else { Verdict::Diverging };
                criteria.push(Criterion::new(
                    id,
                    r.verdict == expect,
                    format!("{:?} (expected {expect:?}), dyadic bin slope {:.4} over {} bins", r.verdict, r.bin_slope, r.bins),
                ));
                reports.push(r);
            }
            Err(e) => criteria.push(Criterion::skipped(id, e)),
        }
    }
    (criteria, reports)
}

fn random_coeffs(spec: Arc<Spectrum>, rng: &mut ChaCha8Rng, decay: f64) -> Result<CoeffArray> {
    let blocks = (0..spec.len())
        .map(|l| {
            let s = (-decay * spec.root(l)).exp();
            (0..spec.mult(l))
                .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * s)
                .collect()
        })
        .collect();
    CoeffArray::new(spec, blocks)
}

fn random_block(rng: &mut ChaCha8Rng, shape: (usize, usize)) -> Array2<Complex64> {
    Array2::from_shape_fn(shape, |_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

fn weight_criteria(ctx: &Context, nu: f64) -> Result<Vec<Criterion>> {
    let cfg = &ctx.config;
    let w = cfg.weight_sequence()?;
    let mut out = Vec::new();
    let k_max = 32.min(w.horizon() / 2);
    let rep = verify_conditions(&w, k_max)?;
    out.push(Criterion::new(
        "weights.conditions",
        rep.passes(cfg.variant),
        format!(
            "{:?} conditions over k <= {k_max}: stability {}, moderate growth {}, factorial bound (some l) {}, (all l) {}",
            cfg.variant, rep.stability.pass, rep.moderate_growth.pass, rep.factorial_bound.pass, rep.factorial_bound_all.pass
        ),
    ));

    let rs: Vec<f64> = (0..=70).map(|i| 10f64.powf(-1.0 + 0.1 * i as f64)).collect();
    let ms = rs.iter().map(|&r| w.associated_function(nu, r)).collect::<Result<Vec<_>>>()?;
    let monotone = ms.windows(2).all(|p| p[1] >= p[0]) && ms.iter().all(|&m| m >= 0.0);
    out.push(Criterion::new("weights.associated_monotone", monotone, format!("M(r) on {} points of [0.1, 1e6]", rs.len())));

    if let WeightKind::Gevrey { s } = w.kind() {
        let pts: Vec<(f64, f64)> = rs.iter().zip(&ms).filter(|(r, _)| **r >= 10.0).map(|(r, m)| (r.ln(), m.ln())).collect();
        let slope = ls_slope(&pts);
        out.push(Criterion::new(
            "weights.gevrey_slope",
            (slope - 1.0 / s).abs() <= GEVREY_SLOPE_TOLERANCE,
            format!("log-log slope of M on [10, 1e6] is {slope:.4}, 1/s = {:.4}", 1.0 / s),
        ));
    }

    let fit = w.fit_doubling(nu, &rs[20..])?;
    out.push(Criterion::new(
        "weights.doubling",
        fit.bounded,
        format!("2M(r) <= M({:.3} r) + {:.3}", fit.factor, fit.log_const),
    ));
    Ok(out)
}

fn spectral_criteria(ctx: &Context, model: &SpectralModel) -> Result<Vec<Criterion>> {
    let big = Spectrum::new(ctx.config.manifold, ctx.config.spectral_j())?;
    let mut out = vec![check_orthonormality(model), check_spectrum(&big)];
    out.push(check_weyl(&big).0);
    out.extend(check_summability(&big, ctx.config.summability_q.as_deref()).0);
    Ok(out)
}

fn coeff_criteria(ctx: &Context, model: &SpectralModel, rng: &mut ChaCha8Rng) -> Result<Vec<Criterion>> {
    let spec = model.spectrum_arc();
    let mut out = Vec::new();
    let mut worst: f64 = 0.0;
    for _ in 0..RANDOM_FUNCTIONS {
        let u = random_coeffs(Arc::clone(&spec), rng, 0.0)?;
        let energy: f64 = (0..u.len()).map(|l| u.hs_norm(l).powi(2)).sum();
        let r = plancherel_residual(model, &synthesize_nodes(model, &u)?)? / energy.max(1.0);
        worst = worst.max(r);
    }
    out.push(Criterion::new(
        "plancherel",
        worst < PLANCHEREL_TOLERANCE,
        format!("worst relative residual {worst:.3e} over {RANDOM_FUNCTIONS} random band-limited functions"),
    ));

    let d = spec.mults().iter().copied().max().unwrap_or(1).min(32);
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for (p, q) in [(1.0, 2.0), (1.0, f64::INFINITY), (2.0, f64::INFINITY)] {
        let c = norm_inequality_check(d, p, q, NORM_TRIALS, rng)?;
        violations += c.violations;
        slack = slack.min(c.worst_slack);
    }
    out.push(Criterion::new(
        "norm_inequalities",
        violations == 0,
        format!("{violations} violations, worst slack {slack:.3e}, d = {d}"),
    ));

    let v = Builtin::Poisson { a: 1.0 }.coefficients(Arc::clone(&spec))?;
    let w = Builtin::DualGrowth { a: 0.5 }.coefficients(Arc::clone(&spec))?;
    let weight = ctx.config.weight_sequence()?.with_variant(Variant::Roumieu);
    let dual = duality_equivalence_probe(&v, &w, &weight, &ctx.config.l_grid, ctx.config.tolerance)?;
    out.push(Criterion::new(
        "duality",
        dual.agree && dual.cs_violations == 0,
        format!("HS and componentwise verdicts agree: {}, min Cauchy-Schwarz slack {:.3e}", dual.agree, dual.min_cs_slack),
    ));
    Ok(out)
}

fn tensor_criteria(model: &SpectralModel, rng: &mut ChaCha8Rng) -> Result<Vec<Criterion>> {
    let spec = model.spectrum_arc();
    let n = spec.len().min(8);
    let small = Arc::new(spec.truncated(n)?);
    let mut out = Vec::new();

    let mut blocks = Vec::with_capacity(n * n);
    for k in 0..n {
        for j in 0..n {
            blocks.push(random_block(rng, (small.mult(k), small.mult(j))));
        }
    }
    let t = TensorRep::new(Arc::clone(&small), Arc::clone(&small), blocks)?;
    let u = random_coeffs(Arc::clone(&small), rng, 0.5)?;
    let v = random_coeffs(Arc::clone(&small), rng, 0.5)?;
    let adj = adjointness_residual(&t, &u, &v)?;
    out.push(Criterion::new(
        "tensor.adjointness",
        adj.residual < ADJOINTNESS_TOLERANCE.max(adj.roundoff_bound),
        format!("random K=J={n} tensor, residual {:.3e}", adj.residual),
    ));

    let sigma: Vec<Array2<Complex64>> = (0..n).map(|l| random_block(rng, (small.mult(l), small.mult(l)))).collect();
    let diag = TensorRep::block_diagonal(Arc::clone(&small), &sigma)?;
    let back = multiplier_extract(&diag, MULTIPLIER_TOLERANCE)?.sigma();
    out.push(Criterion::new(
        "tensor.multiplier_roundtrip",
        back.as_deref() == Some(&sigma[..]),
        "sigma recovered exactly from a block-diagonal tensor",
    ));

    let (lap, _) = from_basis_action(&Laplacian, model, n, n)?;
    let ok = multiplier_extract(&lap, MULTIPLIER_TOLERANCE)?.sigma().is_some_and(|s| {
        s.iter().enumerate().all(|(l, m)| {
            m.indexed_iter().all(|((i, k), z)| {
                let want = if i == k { spec.lambda(l) } else { 0.0 };
                (z - want).norm() <= 1e-8 * (1.0 + spec.lambda(l))
            })
        })
    });
    out.push(Criterion::new("tensor.laplacian_multiplier", ok, "sigma(l) = lambda_l Id"));
    Ok(out)
}

#[derive(Serialize)]
struct VerifyBody {
    manifold: Manifold,
    #[serde(rename = "J")]
    j: usize,
    passed: usize,
    failed: usize,
}

pub(crate) fn verify(ctx: &Context) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let model = model_for(ctx)?;
    let mut criteria = weight_criteria(ctx, model.spectrum().nu())?;
    criteria.extend(spectral_criteria(ctx, &model)?);
    criteria.extend(coeff_criteria(ctx, &model, &mut rng)?);
    criteria.extend(tensor_criteria(&model, &mut rng)?);
    let failed = criteria.iter().filter(|c| !c.pass).count();
    let body = VerifyBody { manifold: ctx.config.manifold, j: ctx.config.j, passed: criteria.len() - failed, failed };
    finish(ctx, "verify", criteria, &body, if failed > 0 { EXIT_FAILURE } else { 0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lattice_counts_small_values() {
        let c = lattice_counts(25);
        assert_eq!(c[&0], 1);
        assert_eq!(c[&1], 4);
        assert_eq!(c[&2], 4);
        assert_eq!(c[&5], 8);
        assert_eq!(c[&25], 12);
        assert!(!c.contains_key(&3));
    }

    #[test]
    fn spectrum_checks_pass_on_all_models() {
        for m in [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2] {
            assert!(check_spectrum(&Spectrum::new(m, 60).unwrap()).pass, "{m}");
        }
    }
}
