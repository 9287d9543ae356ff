//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::sync::Arc;
use std::time::Instant;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use komatsu::catalog::Builtin;
use komatsu::coeff::{
    analyze, bidual_membership, block_norm, classify, duality_equivalence_probe, norm_inequality_check,
    plancherel_residual, strongest_class, synthesize_nodes, CoeffArray, DecayClass, LGrid, DEFAULT_TOLERANCE,
};
use komatsu::spectral::{
    summability_probe, weyl_multiplicity_check, Manifold, SpectralModel, Spectrum, Verdict,
};
use komatsu::tensor::{
    adjointness_residual, from_basis_action, multiplier_extract, Derivative, Laplacian, MultiplyCos, SampledOperator,
    TensorRep,
};
use komatsu::weights::{Variant, WeightSequence};

const GRAM_TOL: f64 = 1e-10;
const PLANCHEREL_TOL: f64 = 1e-8;
const RUNTIME_1_S: f64 = 30.0;
const RUNTIME_2_S: f64 = 5.0;
const SLOPE_TOL: f64 = 0.05;
const M_E_TOL: f64 = 1e-9;
const FIT_L_REL: f64 = 0.10;
const ADJOINT_TOL: f64 = 1e-12;
const ORACLE_TOL: f64 = 1e-8;
const OFF_DIAGONAL_MIN: f64 = 0.9;
const SIGMA_TOL: f64 = 1e-9;
const TOTAL_RUNTIME_S: f64 = 300.0;

type Outcome = (bool, String);
type Check = Box<dyn FnOnce(&mut ChaCha8Rng) -> Outcome>;

fn rand_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

fn random_array(spec: Arc<Spectrum>, rng: &mut ChaCha8Rng, live: usize, decay: impl Fn(f64) -> f64) -> CoeffArray {
    let blocks = (0..spec.len())
        .map(|l| {
            let s = if l < live { decay(spec.root(l)) } else { 0.0 };
            (0..spec.mult(l)).map(|_| rand_c(rng) * s).collect()
        })
        .collect();
    CoeffArray::new(spec, blocks).unwrap()
}

fn c1_orthonormality(rng: &mut ChaCha8Rng) -> Outcome {
    let t0 = Instant::now();
    let mut worst_gram: f64 = 0.0;
    let mut worst_planch: f64 = 0.0;
    for (m, j) in [(Manifold::Circle, 64), (Manifold::Torus2, 50), (Manifold::Sphere2, 40)] {
        let model = SpectralModel::build_minimal(m, j).unwrap();
        let spec = model.spectrum_arc();
        // Gram matrix from raw basis samples and quadrature weights
        let w = model.weights();
        let dim = spec.total_dim();
        let mut b = Array2::<f64>::zeros((dim, w.len()));
        let mut row = 0;
        for l in 0..spec.len() {
            for k in 0..spec.mult(l) {
                let s = model.basis_samples(l, k).unwrap();
                for (i, v) in s.iter().enumerate() {
                    b[[row, i]] = v * w[i].sqrt();
                }
                row += 1;
            }
        }
        let g = b.dot(&b.t());
        let r = g.indexed_iter().map(|((a, c), v)| (v - if a == c { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
        worst_gram = worst_gram.max(r);
        for _ in 0..100 {
            let u = random_array(Arc::clone(&spec), rng, spec.len(), |_| 1.0);
            let samples = synthesize_nodes(&model, &u).unwrap();
            worst_planch = worst_planch.max(plancherel_residual(&model, &samples).unwrap());
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    (
        worst_gram < GRAM_TOL && worst_planch < PLANCHEREL_TOL && secs < RUNTIME_1_S,
        format!("max Gram residual {worst_gram:.2e}, max Plancherel residual {worst_planch:.2e}, {secs:.1}s"),
    )
}

fn c2_lattice() -> Outcome {
    let t0 = Instant::now();
    let mut counts = std::collections::BTreeMap::<i64, usize>::new();
    for a in -20i64..=20 {
        for b in -20i64..=20 {
            let v = a * a + b * b;
            if v <= 400 {
                *counts.entry(v).or_default() += 1;
            }
        }
    }
    let spec = Spectrum::new(Manifold::Torus2, counts.len() + 1).unwrap();
    let mut mismatches = 0;
    for (j, (&v, &c)) in counts.iter().enumerate() {
        if spec.lambda(j) != v as f64 || spec.mult(j) != c {
            mismatches += 1;
        }
    }
    let next_ok = spec.lambda(counts.len()) > 400.0;
    let secs = t0.elapsed().as_secs_f64();
    (
        mismatches == 0 && next_ok && secs < RUNTIME_2_S,
        format!("{} levels with lambda <= 400, {mismatches} mismatches, {secs:.2}s", counts.len()),
    )
}

fn c3_weyl() -> Outcome {
    let s = weyl_multiplicity_check(&Spectrum::new(Manifold::Sphere2, 2000).unwrap());
    let t = weyl_multiplicity_check(&Spectrum::new(Manifold::Torus2, 2000).unwrap());
    let sphere_exact = s.sup == 1.0 && s.running_sup.iter().all(|&v| v == 1.0);
    (
        sphere_exact && t.stable_over(0.5),
        format!("sphere sup {} (j <= 2000), torus sup {} at j = {}, stable over last half: {}", s.sup, t.sup, t.argmax, t.stable_over(0.5)),
    )
}

fn c4_summability() -> Outcome {
    let sphere = Spectrum::new(Manifold::Sphere2, 2000).unwrap();
    let circle = Spectrum::new(Manifold::Circle, 100_000).unwrap();
    let cases = [(&sphere, 1.2, Verdict::Converged), (&sphere, 1.0, Verdict::Diverging), (&circle, 0.6, Verdict::Converged), (&circle, 0.5, Verdict::Diverging)];
    let mut ok = true;
    let mut parts = Vec::new();
    for (s, q, want) in cases {
        let r = summability_probe(s, q, s.len()).unwrap();
        ok &= r.verdict == want;
        parts.push(format!("{} q={q}: {:?} (slope {:.3})", s.manifold(), r.verdict, r.bin_slope));
    }
    (ok, parts.join(", "))
}

/// `sup_k (ν k log r − log (νk)!^s)` by direct scan, the reference for `M`.
fn scan_m(s: f64, nu: usize, r: f64, k_max: usize) -> f64 {
    let mut lf = 0.0;
    let mut best: f64 = 0.0;
    for n in 1..=k_max * nu {
        lf += (n as f64).ln();
        if n % nu == 0 {
            best = best.max(n as f64 * r.ln() - s * lf);
        }
    }
    best
}

fn c5_associated() -> Outcome {
    let rs: Vec<f64> = (0..=50).map(|i| 10f64.powf(1.0 + 0.1 * i as f64)).collect();
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [1.0, 1.5, 2.0] {
        let w = WeightSequence::gevrey(s, Variant::Roumieu).unwrap();
        for nu in [1.0, 2.0] {
            let pts: Vec<(f64, f64)> = rs.iter().map(|&r| (r.ln(), w.associated_function(nu, r).unwrap().ln())).collect();
            let slope = komatsu::stats::ls_slope(&pts);
            ok &= (slope - 1.0 / s).abs() <= SLOPE_TOL;
            parts.push(format!("s={s} nu={nu}: {slope:.4}"));
        }
    }
    let w = WeightSequence::gevrey(1.0, Variant::Roumieu).unwrap();
    let m_e = w.associated_function(1.0, std::f64::consts::E).unwrap();
    let oracle = scan_m(1.0, 1, std::f64::consts::E, 50);
    let exact = 2.0 - 2f64.ln();
    ok &= (m_e - oracle).abs() < M_E_TOL && (oracle - exact).abs() < M_E_TOL;
    parts.push(format!("M(e) = {m_e:.12} (scan {oracle:.12})"));
    (ok, parts.join(", "))
}

fn c6_classifier() -> Outcome {
    let w = WeightSequence::gevrey(1.0, Variant::Roumieu).unwrap();
    let grid = LGrid::default();
    let tol = DEFAULT_TOLERANCE;
    let mut false_crossings = 0;
    let mut parts = Vec::new();
    let check = |u: &CoeffArray, pass: &[DecayClass], fail: &[DecayClass], strongest: &[DecayClass]| -> (usize, Option<f64>) {
        let mut bad = 0;
        let mut fitted = None;
        for &c in pass {
            let e = classify(u, &w, c, &grid, tol).unwrap();
            bad += usize::from(!e.passed());
            if c == DecayClass::GevreyRoumieu {
                fitted = e.fitted_l;
            }
        }
        for &c in fail {
            let e = classify(u, &w, c, &grid, tol).unwrap();
            // a failing existential class must be infeasible at every grid L
            let clean = !e.passed() && (c.for_all_l() || e.grid.iter().all(|g| !g.feasible));
            bad += usize::from(!clean);
        }
        let top = strongest_class(u, &w, &grid, tol).unwrap();
        bad += usize::from(!top.is_some_and(|t| strongest.contains(&t)));
        (bad, fitted)
    };
    use DecayClass::*;
    for a in [0.3, 0.5, 1.0] {
        let u = Builtin::Poisson { a }.coefficients(Arc::new(Spectrum::new(Manifold::Circle, 60).unwrap())).unwrap();
        let (bad, fitted) = check(&u, &[GevreyRoumieu, Smooth], &[GevreyBeurling], &[Analytic, GevreyRoumieu]);
        let fit_ok = fitted.is_some_and(|l| (l - a).abs() <= FIT_L_REL * a);
        false_crossings += bad + usize::from(!fit_ok);
        parts.push(format!("gevrey a={a}: L={:.3}", fitted.unwrap_or(f64::NAN)));
    }
    for b in [0.25, 0.5, 1.0] {
        let u = Builtin::Subgevrey { b }.coefficients(Arc::new(Spectrum::new(Manifold::Circle, 4000).unwrap())).unwrap();
        let (bad, _) = check(&u, &[Smooth], &[GevreyRoumieu, Analytic, GevreyBeurling], &[Smooth]);
        false_crossings += bad;
        parts.push(format!("subgevrey b={b}: {}", if bad == 0 { "ok" } else { "crossed" }));
    }
    for a in [0.3, 0.5, 1.0] {
        let u = Builtin::DualGrowth { a }.coefficients(Arc::new(Spectrum::new(Manifold::Circle, 60).unwrap())).unwrap();
        let (bad, _) = check(&u, &[AlphaDualRoumieu], &[Smooth, Analytic, GevreyRoumieu, GevreyBeurling], &[AlphaDualRoumieu]);
        false_crossings += bad;
        parts.push(format!("growth a={a}: {}", if bad == 0 { "ok" } else { "crossed" }));
    }
    (false_crossings == 0, format!("{false_crossings} false crossings; {}", parts.join(", ")))
}

fn c7_perfectness() -> Outcome {
    let w = WeightSequence::gevrey(1.0, Variant::Roumieu).unwrap();
    let grid = LGrid::default();
    let log_step = grid.step().ln();
    let mut disagreements = 0;
    let mut worst_steps: f64 = 0.0;
    for i in 0..20 {
        let l0 = 0.2 * 10f64.powf(2.0 * i as f64 / 19.0);
        let j = ((600.0 / l0) as usize).clamp(40, 3000);
        let spec = Arc::new(Spectrum::new(Manifold::Circle, j).unwrap());
        let nu = spec.nu();
        let u = CoeffArray::leading(Arc::clone(&spec), |l| {
            let m = if l == 0 { 0.0 } else { w.associated_function(nu, l0 * spec.root(l)).unwrap() };
            Complex64::new((-m).exp(), 0.0)
        })
        .unwrap();
        let e = classify(&u, &w, DecayClass::GevreyRoumieu, &grid, DEFAULT_TOLERANCE).unwrap();
        let b = bidual_membership(&u, &w, &grid).unwrap();
        if e.passed() != (b.membership != komatsu::coeff::Membership::Fail) {
            disagreements += 1;
            continue;
        }
        if let (Some(a), Some(c)) = (e.fitted_l, b.found_l) {
            let steps = (a / c).ln().abs() / log_step;
            worst_steps = worst_steps.max(steps);
            if steps > 1.0 + 1e-9 {
                disagreements += 1;
            }
        } else if e.fitted_l.is_some() != b.found_l.is_some() {
            disagreements += 1;
        }
    }
    (
        disagreements == 0,
        format!("20 families over L0 in [0.2, 20]: {disagreements} disagreements, worst gap {worst_steps:.2} grid steps"),
    )
}

fn c8_duality(rng: &mut ChaCha8Rng) -> Outcome {
    let w8 = WeightSequence::gevrey(1.0, Variant::Roumieu).unwrap();
    let grid = LGrid::default();
    let spec = Arc::new(Spectrum::new(Manifold::Sphere2, 200).unwrap());
    let mut disagree = 0;
    let mut cs_bad = 0;
    let mut hyp_bad = 0;
    let mut min_slack = f64::INFINITY;
    for _ in 0..50 {
        let a = rng.random_range(0.5..2.0);
        let b = rng.random_range(0.1..1.0);
        let v = random_array(Arc::clone(&spec), rng, spec.len(), |x| (-a * x).exp());
        let w = random_array(Arc::clone(&spec), rng, spec.len(), |x| (b * x.sqrt()).exp());
        let r = duality_equivalence_probe(&v, &w, &w8, &grid, DEFAULT_TOLERANCE).unwrap();
        disagree += usize::from(!r.agree);
        cs_bad += r.cs_violations;
        hyp_bad += usize::from(!(r.v_in_class && r.w_in_dual));
        min_slack = min_slack.min(r.min_cs_slack);
    }
    (
        disagree == 0 && cs_bad == 0 && hyp_bad == 0,
        format!("50 pairs: {disagree} disagreements, {cs_bad} Cauchy-Schwarz violations (min slack {min_slack:.2e}), {hyp_bad} hypothesis failures"),
    )
}

fn c9_adjointness(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst_random: f64 = 0.0;
    let s8 = Arc::new(Spectrum::new(Manifold::Torus2, 8).unwrap());
    for _ in 0..100 {
        let mut blocks = Vec::with_capacity(64);
        for k in 0..8 {
            for j in 0..8 {
                blocks.push(Array2::from_shape_fn((s8.mult(k), s8.mult(j)), |_| rand_c(rng)));
            }
        }
        let t = TensorRep::new(Arc::clone(&s8), Arc::clone(&s8), blocks).unwrap();
        let u = random_array(Arc::clone(&s8), rng, 8, |x| (-x).exp());
        let v = random_array(Arc::clone(&s8), rng, 8, |x| (-x).exp());
        worst_random = worst_random.max(adjointness_residual(&t, &u, &v).unwrap().residual);
    }

    let ops: [&dyn SampledOperator; 3] = [&Laplacian, &Derivative, &MultiplyCos];
    let mut worst_op: f64 = 0.0;
    let mut worst_oracle: f64 = 0.0;
    for (m, jm, jin) in [(Manifold::Circle, 32, 8), (Manifold::Torus2, 30, 8), (Manifold::Sphere2, 16, 8)] {
        let model = SpectralModel::build_minimal(m, jm).unwrap();
        let spec = model.spectrum_arc();
        for op in ops {
            let (t8, _) = from_basis_action(op, &model, 8, 8).unwrap();
            let u = Builtin::Poisson { a: 1.0 }.coefficients(Arc::clone(&spec)).unwrap();
            let v = Builtin::GevreyDecay { a: 0.7, s: 1.0 }.coefficients(Arc::clone(&spec)).unwrap();
            worst_op = worst_op.max(adjointness_residual(&t8, &u, &v).unwrap().residual);

            let (t, alias) = from_basis_action(op, &model, jm, jin).unwrap();
            assert!(!alias.aliased(), "{m} {}: {:?}", op.name(), alias.warnings);
            let u = random_array(Arc::clone(&spec), rng, jin, |_| 1.0);
            let via_tensor = t.apply(&u).unwrap();
            let direct = analyze(&model, &op.apply(&model, &synthesize_nodes(&model, &u).unwrap()).unwrap()).unwrap();
            let d = via_tensor.flat().iter().zip(direct.flat()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            worst_oracle = worst_oracle.max(d);
        }
    }
    (
        worst_random < ADJOINT_TOL && worst_op < ADJOINT_TOL && worst_oracle < ORACLE_TOL,
        format!(
            "random K=J=8: {worst_random:.2e}, catalog operators: {worst_op:.2e}, tensor vs direct: {worst_oracle:.2e}"
        ),
    )
}

fn c10_multiplier(rng: &mut ChaCha8Rng) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let model = SpectralModel::build_minimal(Manifold::Circle, 16).unwrap();
    let spec = model.spectrum_arc();
    let z = |re: f64| Complex64::new(re, 0.0);

    let (lap, _) = from_basis_action(&Laplacian, &model, 8, 8).unwrap();
    let sig = multiplier_extract(&lap, 1e-10).unwrap().sigma();
    let lap_ok = sig.as_ref().is_some_and(|s| {
        s.iter().enumerate().all(|(l, m)| {
            m.indexed_iter().all(|((i, k), v)| (v - z(if i == k { spec.lambda(l) } else { 0.0 })).norm() < SIGMA_TOL * (1.0 + spec.lambda(l)))
        })
    });
    ok &= lap_ok;
    parts.push(format!("laplacian sigma(l) = l^2 Id: {lap_ok}"));

    // (cos, sin) pair: d/dx cos(lx) = -l sin(lx), d/dx sin(lx) = l cos(lx)
    let (der, _) = from_basis_action(&Derivative, &model, 8, 8).unwrap();
    let sig = multiplier_extract(&der, 1e-10).unwrap().sigma();
    let der_ok = sig.as_ref().is_some_and(|s| {
        s.iter().enumerate().all(|(l, m)| {
            let f = l as f64;
            let want = if l == 0 { vec![z(0.0)] } else { vec![z(0.0), z(f), z(-f), z(0.0)] };
            m.iter().zip(&want).all(|(a, b)| (a - b).norm() < SIGMA_TOL * (1.0 + f))
        })
    });
    ok &= der_ok;
    parts.push(format!("derivative sigma(l) = [[0, l], [-l, 0]]: {der_ok}"));

    let (cos, _) = from_basis_action(&MultiplyCos, &model, 8, 8).unwrap();
    let r = multiplier_extract(&cos, 1e-10).unwrap();
    let cos_ok = r.sigma().is_none() && r.off_diagonal_ratio() > OFF_DIAGONAL_MIN;
    ok &= cos_ok;
    parts.push(format!("cos rejected with off-diagonal ratio {:.3}", r.off_diagonal_ratio()));

    let mut exact = true;
    for m in [Manifold::Circle, Manifold::Torus2, Manifold::Sphere2] {
        let s = Arc::new(Spectrum::new(m, 8).unwrap());
        let sigma: Vec<Array2<Complex64>> =
            (0..8).map(|l| Array2::from_shape_fn((s.mult(l), s.mult(l)), |_| rand_c(rng))).collect();
        let t = TensorRep::block_diagonal(Arc::clone(&s), &sigma).unwrap();
        exact &= multiplier_extract(&t, 1e-10).unwrap().sigma().as_deref() == Some(&sigma[..]);
    }
    ok &= exact;
    parts.push(format!("block-diagonal round trip exact: {exact}"));
    (ok, parts.join(", "))
}

fn c11_norms(rng: &mut ChaCha8Rng) -> Outcome {
    let inv = |r: f64| if r.is_infinite() { 0.0 } else { 1.0 / r };
    let pnorm = |a: &[Complex64], p: f64| {
        if p.is_infinite() {
            a.iter().map(|z| z.norm()).fold(0.0, f64::max)
        } else {
            a.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
        }
    };
    let mut violations = 0;
    let mut lib_violations = 0;
    let mut vectors = 0;
    for (p, q) in [(1.0, 2.0), (1.0, f64::INFINITY), (2.0, f64::INFINITY)] {
        for d in 1..=32usize {
            let trials = 10_000 / 32 + 1;
            lib_violations += norm_inequality_check(d, p, q, trials, rng).unwrap().violations;
            for _ in 0..trials {
                let len = rng.random_range(1..=d * d);
                let a: Vec<Complex64> = (0..len).map(|_| rand_c(rng)).collect();
                let (np, nq) = (pnorm(&a, p), pnorm(&a, q));
                let df = d as f64;
                let slack = 8.0 * f64::EPSILON * np.max(nq);
                violations += usize::from(nq > df.powf(2.0 * inv(q)) * np + slack);
                violations += usize::from(np > df.powf(2.0 * (inv(p) - inv(q))) * nq + slack);
                // library norm against the direct one
                violations += usize::from((block_norm(&a, p) - np).abs() > 1e-12 * np);
                vectors += 1;
            }
        }
    }
    (
        violations == 0 && lib_violations == 0,
        format!("{vectors} vectors over (1,2), (1,inf), (2,inf): {violations} direct and {lib_violations} library violations"),
    )
}

fn c12_beurling() -> Outcome {
    let w = WeightSequence::gevrey(1.0, Variant::Roumieu).unwrap();
    let grid = LGrid::new(0.004, 4.0, 73).unwrap();
    let spec = Arc::new(Spectrum::new(Manifold::Circle, 100).unwrap());
    let l0 = 1.0;
    let u = CoeffArray::leading(Arc::clone(&spec), |l| {
        let m = if l == 0 { 0.0 } else { w.associated_function(spec.nu(), l0 * spec.root(l)).unwrap() };
        Complex64::new((-m).exp(), 0.0)
    })
    .unwrap();
    let r = classify(&u, &w, DecayClass::GevreyRoumieu, &grid, DEFAULT_TOLERANCE).unwrap();
    let b = classify(&u, &w, DecayClass::GevreyBeurling, &grid, DEFAULT_TOLERANCE).unwrap();
    let above_infeasible = b.grid.iter().filter(|g| g.l > l0).all(|g| !g.feasible);
    let sup = Builtin::SuperExponential.coefficients(Arc::clone(&spec)).unwrap();
    let s = classify(&sup, &w, DecayClass::GevreyBeurling, &grid, DEFAULT_TOLERANCE).unwrap();
    (
        r.passed() && !b.passed() && above_infeasible && s.passed(),
        format!(
            "exp(-M(L0 x)), L0 = 1: roumieu {} (L = {:.3}), beurling {} (infeasible at every grid L > L0: {above_infeasible}); super-exponential beurling {}",
            r.passed(),
            r.fitted_l.unwrap_or(f64::NAN),
            b.passed(),
            s.passed()
        ),
    )
}

fn main() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(20261014);
    let criteria: Vec<(&str, Check)> = vec![
        ("orthonormality and Plancherel", Box::new(c1_orthonormality)),
        ("torus multiplicity oracle", Box::new(|_| c2_lattice())),
        ("Weyl bound", Box::new(|_| c3_weyl())),
        ("summability threshold", Box::new(|_| c4_summability())),
        ("associated function", Box::new(|_| c5_associated())),
        ("classifier recovery", Box::new(|_| c6_classifier())),
        ("perfectness consistency", Box::new(|_| c7_perfectness())),
        ("duality equivalence", Box::new(c8_duality)),
        ("adjointness", Box::new(c9_adjointness)),
        ("multiplier characterization", Box::new(c10_multiplier)),
        ("norm inequalities", Box::new(c11_norms)),
        ("Beurling variant", Box::new(|_| c12_beurling())),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f(&mut rng);
        failed += usize::from(!ok);
        println!(
            "{} [{:>2}] {name}: {detail} ({:.2}s)",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            t.elapsed().as_secs_f64()
        );
    }
    let total = t0.elapsed().as_secs_f64();
    let in_budget = total < TOTAL_RUNTIME_S;
    println!("{} total runtime {total:.1}s (budget {TOTAL_RUNTIME_S}s)", if in_budget { "PASS" } else { "FAIL" });
    if failed > 0 || !in_budget {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 12 acceptance criteria passed");
}
