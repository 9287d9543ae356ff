use std::sync::Arc;

use serde::Serialize;

use super::config::{InputSpec, OperatorSpec};
use super::verify::{
    check_orthonormality, check_spectrum, check_summability, check_weyl, model_for, WeylSummary, ADJOINTNESS_TOLERANCE,
    MULTIPLIER_TOLERANCE,
};
use super::{finish, Context, Criterion, Outcome, EXIT_ALIASED, EXIT_FAILURE, EXIT_INVARIANT, EXIT_UNRESOLVED_INPUT};
use crate::catalog::Builtin;
use crate::coeff::{analyze, bidual_membership, classify as classify_one, BidualReport, CoeffArray, DecayClass, DecayEnvelope};
use crate::error::{Error, Result};
use crate::io::{read_coeff_file, read_sample_file, write_block_norm_csv, write_decay_csv, write_json, write_tensor_file};
use crate::spectral::{supnorm_ratio_check, ModelDescriptor, Spectrum, SummabilityReport, SupNormReport, ORTHONORMALITY_TOLERANCE};
use crate::tensor::{
    adjointness_residual, from_basis_action, multiplier_extract, sequentiality_probe, AdjointnessReport, AliasReport,
    MultiplierResult, SequentialityReport,
};
use crate::weights::{Variant, WeightKind};

fn class_name(c: DecayClass) -> String {
    serde_json::to_value(c).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default()
}

#[derive(Serialize)]
struct SpectraBody {
    model: ModelDescriptor,
    weyl: WeylSummary,
    summability: Vec<SummabilityReport>,
    supnorm: SupNormReport,
    files: Vec<String>,
}

pub(crate) fn spectra(ctx: &Context) -> Result<Outcome> {
    let model = model_for(ctx)?;
    let big = Spectrum::new(ctx.config.manifold, ctx.config.spectral_j())?;
    let mut criteria = vec![check_orthonormality(&model), check_spectrum(&big)];
    let (weyl_c, weyl) = check_weyl(&big);
    criteria.push(weyl_c);
    let (sum_c, summability) = check_summability(&big, ctx.config.summability_q.as_deref());
    criteria.extend(sum_c);

    let descriptor = model.descriptor();
    write_json(&ctx.out("model.json"), &descriptor)?;
    let body = SpectraBody {
        model: descriptor,
        weyl,
        summability,
        supnorm: supnorm_ratio_check(&model),
        files: vec!["model.json".into()],
    };
    let exit = if criteria.iter().all(|c| c.pass) { 0 } else { EXIT_INVARIANT };
    finish(ctx, "spectra", criteria, &body, exit)
}

fn resolve_input(ctx: &Context) -> Result<(String, CoeffArray)> {
    let cfg = &ctx.config;
    match &cfg.input {
        None => Err(Error::InvalidArgument("no input configured".into())),
        Some(InputSpec::Builtin(b)) => {
            b.validate()?;
            let spec = Arc::new(Spectrum::new(cfg.manifold, cfg.j)?);
            Ok((format!("builtin {}", b.name()), b.coefficients(spec)?))
        }
        Some(InputSpec::CoeffFile { coeff_file }) => {
            let path = ctx.resolve(coeff_file);
            let u = read_coeff_file(&path)?;
            if u.spectrum().manifold() != cfg.manifold {
                return Err(Error::Misaligned(format!(
                    "coefficient file is on {}, config says {}",
                    u.spectrum().manifold(),
                    cfg.manifold
                )));
            }
            Ok((format!("coefficient file {}", path.display()), u))
        }
        Some(InputSpec::SampleFile { sample_file }) => {
            let path = ctx.resolve(sample_file);
            let model = model_for(ctx)?;
            let r = model.orthonormality_residual();
            if r > ORTHONORMALITY_TOLERANCE {
                return Err(Error::QuadratureUnderresolved { residual: r, tolerance: ORTHONORMALITY_TOLERANCE });
            }
            let samples = read_sample_file(&path, &model)?;
            Ok((format!("sample file {}", path.display()), analyze(&model, &samples)?))
        }
    }
}

#[derive(Serialize)]
struct ClassifyBody {
    input: String,
    #[serde(rename = "J")]
    j: usize,
    weight: WeightKind,
    variant: Variant,
    /// Strongest passing class among those requested, or `"none"`.
    strongest: String,
    envelopes: Vec<DecayEnvelope>,
    bidual: BidualReport,
    files: Vec<String>,
}

#[derive(Serialize)]
struct UnresolvedBody {
    error: String,
}

pub(crate) fn classify(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let (input, u) = match resolve_input(ctx) {
        Ok(v) => v,
        Err(e) => {
            let c = vec![Criterion::new("input", false, e.to_string())];
            return finish(ctx, "classify", c, &UnresolvedBody { error: e.to_string() }, EXIT_UNRESOLVED_INPUT);
        }
    };
    let weight = cfg.weight_sequence()?;
    let classes = cfg.classes();
    let envelopes = classes
        .iter()
        .map(|&c| classify_one(&u, &weight, c, &cfg.l_grid, cfg.tolerance))
        .collect::<Result<Vec<_>>>()?;
    let strongest = DecayClass::BY_STRENGTH
        .iter()
        .find_map(|c| envelopes.iter().find(|e| e.target == *c && e.passed()));
    write_decay_csv(&ctx.out("decay.csv"), &u, strongest, &weight)?;

    let mut criteria = vec![Criterion::new("input", true, input.clone())];
    for e in &envelopes {
        let detail = match (e.fitted_l, e.log_c) {
            (Some(l), Some(c)) => format!("{:?}, L = {l:.4}, log C = {c:.4}, residual {:.3e}", e.membership, e.residual),
            _ => format!("{:?}, residual {:.3e}", e.membership, e.residual),
        };
        criteria.push(Criterion::new(format!("class:{}", class_name(e.target)), e.passed(), detail));
    }
    let body = ClassifyBody {
        input,
        j: u.len(),
        weight: cfg.weight.clone(),
        variant: cfg.variant,
        strongest: strongest.map_or_else(|| "none".into(), |e| class_name(e.target)),
        bidual: bidual_membership(&u, &weight, &cfg.l_grid)?,
        envelopes,
        files: vec!["decay.csv".into()],
    };
    // failing a class is a verdict, not an error
    finish(ctx, "classify", criteria, &body, 0)
}

#[derive(Serialize)]
struct DiagonalSymmetry {
    l: usize,
    norm: f64,
    /// `‖B − Bᵀ‖ / 2`.
    antisymmetric: f64,
    /// `‖B + Bᵀ‖ / 2`.
    symmetric: f64,
}

#[derive(Serialize)]
struct TensorBody {
    operator: String,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "J")]
    j: usize,
    alias: AliasReport,
    adjointness: AdjointnessReport,
    sequentiality: SequentialityReport,
    multiplier: MultiplierResult,
    diagonal_blocks: Vec<DiagonalSymmetry>,
    files: Vec<String>,
}

pub(crate) fn tensor(ctx: &Context) -> Result<Outcome> {
    let cfg = &ctx.config;
    let model = model_for(ctx)?;
    let ortho = check_orthonormality(&model);
    if !ortho.pass {
        return finish(ctx, "tensor", vec![ortho], &UnresolvedBody { error: "quadrature underresolved".into() }, EXIT_FAILURE);
    }
    let blocks = cfg.tensor_blocks();
    let spec = cfg.operator.clone().unwrap_or(OperatorSpec::Named("laplacian".into()));
    let op = spec.resolve()?;
    let (t, alias) = from_basis_action(op.as_ref(), &model, blocks.k, blocks.j)?;
    write_tensor_file(&ctx.out("tensor.json"), &t)?;
    write_block_norm_csv(&ctx.out("block_norms.csv"), &t)?;

    let s = model.spectrum_arc();
    let u = Builtin::Poisson { a: 1.0 }.coefficients(Arc::clone(&s))?;
    let v = Builtin::Poisson { a: 0.5 }.coefficients(Arc::clone(&s))?;
    let adjointness = adjointness_residual(&t, &u, &v)?;
    let multiplier = if t.k() == t.j() {
        multiplier_extract(&t, MULTIPLIER_TOLERANCE)?
    } else {
        MultiplierResult::Rejected { off_diagonal_ratio: f64::NAN }
    };
    let diagonal_blocks = (0..t.k().min(t.j()))
        .map(|l| {
            let b = t.block(l, l);
            let fro = |m: ndarray::Array2<num_complex::Complex64>| m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            DiagonalSymmetry {
                l,
                norm: fro(b.clone()),
                antisymmetric: fro((b - &b.t()) * 0.5),
                symmetric: fro((b + &b.t()) * 0.5),
            }
        })
        .collect();

    let adj_tol = ADJOINTNESS_TOLERANCE.max(adjointness.roundoff_bound);
    let criteria = vec![
        ortho,
        Criterion::new(
            "alias_guard",
            !alias.aliased(),
            if alias.aliased() { alias.warnings.join("; ") } else { format!("top-block energy share {:.3e}", alias.max_top_fraction) },
        ),
        Criterion::new(
            "adjointness",
            adjointness.residual <= adj_tol,
            format!("residual {:.3e} (allowed {adj_tol:.3e})", adjointness.residual),
        ),
    ];
    let body = TensorBody {
        operator: op.name().to_owned(),
        k: t.k(),
        j: t.j(),
        sequentiality: sequentiality_probe(&t, &u, &v)?,
        alias,
        adjointness,
        multiplier,
        diagonal_blocks,
        files: vec!["tensor.json".into(), "block_norms.csv".into()],
    };
    let exit = if body.alias.aliased() && !ctx.allow_alias {
        EXIT_ALIASED
    } else if criteria.iter().any(|c| !c.pass && c.id != "alias_guard") {
        EXIT_FAILURE
    } else {
        0
    };
    finish(ctx, "tensor", criteria, &body, exit)
}
