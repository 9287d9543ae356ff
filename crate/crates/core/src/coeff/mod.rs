//! Block coefficient arrays over a spectrum: transforms, norms and pairings.

mod classify;

pub use classify::{
    strongest_class,
    bidual_membership, classify, BidualReport, DecayClass, DecayEnvelope, GridVerdict, LGrid, Membership,
    SmoothFit, DEFAULT_TOLERANCE,
};

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectral::{Point, SpectralModel, Spectrum};
use crate::weights::WeightSequence;

/// Relative last-quarter growth below which a partial-sum sequence counts as converged.
pub const PAIRING_CONVERGENCE: f64 = 1e-9;

/// Coefficients `v_l ∈ C^{d_l}` for every retained eigenvalue.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffArray {
    spectrum: Arc<Spectrum>,
    blocks: Vec<Vec<Complex64>>,
}

impl CoeffArray {
    pub fn new(spectrum: Arc<Spectrum>, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        if blocks.len() != spectrum.len() {
            return Err(Error::LengthMismatch { expected: spectrum.len(), actual: blocks.len() });
        }
        for (l, b) in blocks.iter().enumerate() {
            if b.len() != spectrum.mult(l) {
                return Err(Error::LengthMismatch { expected: spectrum.mult(l), actual: b.len() });
            }
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { block: l });
            }
        }
        Ok(CoeffArray { spectrum, blocks })
    }

    pub fn zeros(spectrum: Arc<Spectrum>) -> Self {
        let blocks = spectrum.mults().iter().map(|&d| vec![Complex64::new(0.0, 0.0); d]).collect();
        CoeffArray { spectrum, blocks }
    }

    pub fn from_flat(spectrum: Arc<Spectrum>, flat: &[Complex64]) -> Result<Self> {
        if flat.len() != spectrum.total_dim() {
            return Err(Error::LengthMismatch { expected: spectrum.total_dim(), actual: flat.len() });
        }
        let off = spectrum.offsets();
        let blocks = (0..spectrum.len()).map(|l| flat[off[l]..off[l + 1]].to_vec()).collect();
        Self::new(spectrum, blocks)
    }

    /// Array whose block `l` is `value(l)` in its first entry and zero elsewhere.
    pub fn leading<F: Fn(usize) -> Complex64>(spectrum: Arc<Spectrum>, value: F) -> Result<Self> {
        let mut u = Self::zeros(spectrum);
        for (l, b) in u.blocks.iter_mut().enumerate() {
            b[0] = value(l);
        }
        let blocks = std::mem::take(&mut u.blocks);
        Self::new(u.spectrum, blocks)
    }

    /// Single entry `1` at block `j`, entry `k` (zero-based).
    pub fn unit(spectrum: Arc<Spectrum>, j: usize, k: usize) -> Result<Self> {
        if j >= spectrum.len() || k >= spectrum.mult(j) {
            return Err(Error::IndexOutOfRange(format!("entry ({j}, {k})")));
        }
        let mut u = Self::zeros(spectrum);
        u.blocks[j][k] = Complex64::new(1.0, 0.0);
        Ok(u)
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn spectrum_arc(&self) -> Arc<Spectrum> {
        Arc::clone(&self.spectrum)
    }

    pub fn blocks(&self) -> &[Vec<Complex64>] {
        &self.blocks
    }

    pub fn block(&self, l: usize) -> &[Complex64] {
        &self.blocks[l]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn flat(&self) -> Vec<Complex64> {
        self.blocks.iter().flatten().copied().collect()
    }

    /// Hilbert–Schmidt (Euclidean) norm of block `l`.
    pub fn hs_norm(&self, l: usize) -> f64 {
        block_norm(&self.blocks[l], 2.0)
    }

    /// `log ‖v_l‖`, `-∞` for a zero block.
    pub fn log_hs_norm(&self, l: usize) -> f64 {
        self.hs_norm(l).ln()
    }

    pub fn block_norm(&self, l: usize, p: f64) -> f64 {
        block_norm(&self.blocks[l], p)
    }

    /// True when every block with `l ≥ 1` vanishes.
    pub fn is_zero_tail(&self) -> bool {
        self.blocks.iter().skip(1).all(|b| b.iter().all(|z| z.norm_sqr() == 0.0))
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let blocks = self.blocks.iter().map(|b| b.iter().map(|z| z * alpha).collect()).collect();
        CoeffArray { spectrum: self.spectrum_arc(), blocks }
    }

    pub fn added(&self, other: &CoeffArray) -> Result<Self> {
        self.check_aligned(other)?;
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect())
            .collect();
        Ok(CoeffArray { spectrum: self.spectrum_arc(), blocks })
    }

    pub fn check_aligned(&self, other: &CoeffArray) -> Result<()> {
        if self.spectrum.manifold() != other.spectrum.manifold() || self.len() != other.len() {
            return Err(Error::Misaligned(format!(
                "{} with J={} against {} with J={}",
                self.spectrum.manifold(),
                self.len(),
                other.spectrum.manifold(),
                other.len()
            )));
        }
        Ok(())
    }

    pub fn check_model(&self, model: &SpectralModel) -> Result<()> {
        let s = model.spectrum();
        if s.manifold() != self.spectrum.manifold() || s.len() != self.len() {
            return Err(Error::Misaligned(format!(
                "array on {} with J={} used with model {} with J={}",
                self.spectrum.manifold(),
                self.len(),
                s.manifold(),
                s.len()
            )));
        }
        Ok(())
    }
}

/// `ℓ^p` norm of a block; `p = f64::INFINITY` gives the max modulus.
pub fn block_norm(a: &[Complex64], p: f64) -> f64 {
    if p.is_infinite() {
        return a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    }
    if p == 2.0 {
        let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale == 0.0 || !scale.is_finite() {
            return scale;
        }
        return scale * a.iter().map(|z| (z / scale).norm_sqr()).sum::<f64>().sqrt();
    }
    a.iter().map(|z| z.norm().powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Coefficients of node samples.
pub fn analyze(model: &SpectralModel, samples: &[Complex64]) -> Result<CoeffArray> {
    let flat = model.analyze(samples)?;
    CoeffArray::from_flat(model.spectrum_arc(), &flat)
}

/// Truncated expansion `Σ u(j,k) e_j^k(x)`.
pub fn synthesize(model: &SpectralModel, u: &CoeffArray, x: &Point) -> Result<Complex64> {
    u.check_model(model)?;
    model.synthesize_at(&u.flat(), x)
}

/// Truncated expansion on every quadrature node.
pub fn synthesize_nodes(model: &SpectralModel, u: &CoeffArray) -> Result<Vec<Complex64>> {
    u.check_model(model)?;
    model.synthesize(&u.flat())
}

/// `| ‖f‖² − Σ_j ‖f̂(j)‖² |` with the norm on the left taken by quadrature.
pub fn plancherel_residual(model: &SpectralModel, samples: &[Complex64]) -> Result<f64> {
    let lhs = model.inner_product(samples, samples)?.re;
    let u = analyze(model, samples)?;
    let rhs: f64 = (0..u.len()).map(|l| u.hs_norm(l).powi(2)).sum();
    Ok((lhs - rhs).abs())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormCheck {
    pub p: f64,
    pub q: f64,
    pub trials: usize,
    /// Smallest `(rhs - lhs) / rhs` seen over both inequalities.
    pub worst_slack: f64,
    pub violations: usize,
}

/// Random test of `‖a‖_q ≤ d^{2/q} ‖a‖_p` and `‖a‖_p ≤ d^{2(1/p - 1/q)} ‖a‖_q`
/// for complex vectors of length up to `d²`.
pub fn norm_inequality_check<R: Rng>(d: usize, p: f64, q: f64, trials: usize, rng: &mut R) -> Result<NormCheck> {
    if d == 0 || !(p >= 1.0 && p < q) {
        return Err(Error::InvalidArgument(format!("need d ≥ 1 and 1 ≤ p < q, got d={d}, p={p}, q={q}")));
    }
    let df = d as f64;
    let inv = |r: f64| if r.is_infinite() { 0.0 } else { 1.0 / r };
    let c1 = df.powf(2.0 * inv(q));
    let c2 = df.powf(2.0 * (inv(p) - inv(q)));
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..trials {
        let len = rng.random_range(1..=d * d);
        let a: Vec<Complex64> = (0..len)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        let (np, nq) = (block_norm(&a, p), block_norm(&a, q));
        for (lhs, rhs) in [(nq, c1 * np), (np, c2 * nq)] {
            if rhs == 0.0 {
                continue;
            }
            let slack = (rhs - lhs) / rhs;
            worst = worst.min(slack);
            if slack < -8.0 * f64::EPSILON {
                violations += 1;
            }
        }
    }
    Ok(NormCheck { p, q, trials, worst_slack: worst, violations })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PairingReport {
    pub value: Complex64,
    pub abs_partial_sums: Vec<f64>,
    pub converged: bool,
}

/// Whether the last quarter of a nondecreasing partial-sum sequence adds less
/// than `rel` of its final value.
pub fn last_quarter_converged(partial: &[f64], rel: f64) -> bool {
    let Some(&last) = partial.last() else { return true };
    if last == 0.0 {
        return true;
    }
    let n = partial.len();
    let at = n - n / 4;
    let before = if at == 0 { 0.0 } else { partial[at - 1] };
    (last - before) < rel * last
}

/// Bilinear pairing `Σ_l Σ_k u_l(k) v_l(k)`.
pub fn pairing(u: &CoeffArray, v: &CoeffArray) -> Result<PairingReport> {
    u.check_aligned(v)?;
    let mut value = Complex64::new(0.0, 0.0);
    let mut acc = 0.0;
    let mut abs_partial_sums = Vec::with_capacity(u.len());
    for (a, b) in u.blocks.iter().zip(&v.blocks) {
        for (x, y) in a.iter().zip(b) {
            value += x * y;
            acc += x.norm() * y.norm();
        }
        abs_partial_sums.push(acc);
    }
    let converged = last_quarter_converged(&abs_partial_sums, PAIRING_CONVERGENCE);
    Ok(PairingReport { value, abs_partial_sums, converged })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub horizon: usize,
    pub hs_sum: f64,
    pub componentwise_sum: f64,
    pub hs_converged: bool,
    pub componentwise_converged: bool,
    pub agree: bool,
    /// Smallest blockwise `‖v_l‖‖w_l‖ − Σ_i |v_l(i)||w_l(i)|`.
    pub min_cs_slack: f64,
    pub cs_violations: usize,
    pub v_in_class: bool,
    pub w_in_dual: bool,
    pub warnings: Vec<String>,
}

/// Compares `Σ ‖v_l‖‖w_l‖` with `Σ_l Σ_i |v_l(i)||w_l(i)|`.
///
/// The hypotheses (v Gevrey–Roumieu, w in the Roumieu α-dual) are checked with
/// [`classify`]; a failure is reported as a warning.
pub fn duality_equivalence_probe(
    v: &CoeffArray,
    w: &CoeffArray,
    weight: &WeightSequence,
    grid: &LGrid,
    tol: f64,
) -> Result<DualityReport> {
    v.check_aligned(w)?;
    let mut hs = Vec::with_capacity(v.len());
    let mut comp = Vec::with_capacity(v.len());
    let (mut sh, mut sc) = (0.0, 0.0);
    let mut min_cs_slack = f64::INFINITY;
    let mut cs_violations = 0;
    for (a, b) in v.blocks.iter().zip(&w.blocks) {
        let h = block_norm(a, 2.0) * block_norm(b, 2.0);
        let c: f64 = a.iter().zip(b).map(|(x, y)| x.norm() * y.norm()).sum();
        let slack = h - c;
        min_cs_slack = min_cs_slack.min(slack);
        if slack < -4.0 * f64::EPSILON * h * a.len() as f64 {
            cs_violations += 1;
        }
        sh += h;
        sc += c;
        hs.push(sh);
        comp.push(sc);
    }
    let hs_converged = last_quarter_converged(&hs, PAIRING_CONVERGENCE);
    let componentwise_converged = last_quarter_converged(&comp, PAIRING_CONVERGENCE);
    let mut warnings = Vec::new();
    let v_in_class = classify(v, weight, DecayClass::GevreyRoumieu, grid, tol)?.passed();
    let w_in_dual = classify(w, weight, DecayClass::AlphaDualRoumieu, grid, tol)?.passed();
    if !v_in_class {
        warnings.push("v fails the Gevrey-Roumieu envelope test".to_string());
    }
    if !w_in_dual {
        warnings.push("w fails the Roumieu alpha-dual envelope test".to_string());
    }
    Ok(DualityReport {
        horizon: v.len(),
        hs_sum: sh,
        componentwise_sum: sc,
        hs_converged,
        componentwise_converged,
        agree: hs_converged == componentwise_converged,
        min_cs_slack,
        cs_violations,
        v_in_class,
        w_in_dual,
        warnings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Manifold, QuadratureSize};
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn circle(j: usize) -> SpectralModel {
        SpectralModel::build(Manifold::Circle, j, QuadratureSize::Uniform(2 * j + 6)).unwrap()
    }

    #[test]
    fn analyze_basis_and_cosine() {
        let m = circle(6);
        let e: Vec<Complex64> = m.basis_samples(2, 0).unwrap().into_iter().map(c).collect();
        let u = analyze(&m, &e).unwrap();
        for l in 0..u.len() {
            let want: Vec<f64> = if l == 2 { vec![1.0, 0.0] } else { vec![0.0; u.block(l).len()] };
            for (z, w) in u.block(l).iter().zip(want) {
                assert!((z - c(w)).norm() < 1e-14);
            }
        }
        let cosx = m.sample(|p| match p {
            Point::Angle(x) => c(x.cos()),
            _ => unreachable!(),
        });
        let u = analyze(&m, &cosx).unwrap();
        assert!((u.block(1)[0].re - PI.sqrt()).abs() < 1e-13);
        assert!(plancherel_residual(&m, &cosx).unwrap() < 1e-12);
        let zero = analyze(&m, &vec![c(0.0); m.node_count()]).unwrap();
        assert!(zero.is_zero_tail() && zero.hs_norm(0) == 0.0);
    }

    #[test]
    fn synthesize_single_entry() {
        let m = circle(4);
        let u = CoeffArray::unit(m.spectrum_arc(), 1, 0).unwrap();
        let v = synthesize(&m, &u, &Point::Angle(0.7)).unwrap();
        assert!((v.re - 0.7f64.cos() / PI.sqrt()).abs() < 1e-15);
        let z = CoeffArray::zeros(m.spectrum_arc());
        assert_eq!(synthesize(&m, &z, &Point::Angle(0.7)).unwrap(), c(0.0));
        let other = circle(5);
        assert!(matches!(synthesize(&other, &u, &Point::Angle(0.0)), Err(Error::Misaligned(_))));
    }

    #[test]
    fn rejects_bad_blocks() {
        let s = Arc::new(Spectrum::new(Manifold::Circle, 3).unwrap());
        assert!(matches!(
            CoeffArray::new(s.clone(), vec![vec![c(1.0)], vec![c(1.0)], vec![c(0.0); 2]]),
            Err(Error::LengthMismatch { expected: 2, actual: 1 })
        ));
        assert!(matches!(
            CoeffArray::new(s, vec![vec![c(1.0)], vec![c(f64::NAN), c(0.0)], vec![c(0.0); 2]]),
            Err(Error::NonFinite { block: 1 })
        ));
    }

    #[test]
    fn block_norm_examples() {
        let ones = vec![c(1.0); 4];
        assert_eq!(block_norm(&ones, 1.0), 4.0);
        assert_eq!(block_norm(&ones, 2.0), 2.0);
        assert_eq!(block_norm(&ones, f64::INFINITY), 1.0);
        // d = 4 bound d^{2(1 - 1/2)} ‖a‖_2
        assert!(4.0 * block_norm(&ones, 2.0) >= block_norm(&ones, 1.0));
        let e1 = [c(1.0), c(0.0), c(0.0)];
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(block_norm(&e1, p), 1.0);
        }
    }

    #[test]
    fn random_norm_inequalities_hold() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for (p, q) in [(1.0, 2.0), (1.0, f64::INFINITY), (2.0, f64::INFINITY)] {
            let r = norm_inequality_check(16, p, q, 1000, &mut rng).unwrap();
            assert_eq!(r.violations, 0);
            assert!(r.worst_slack >= 0.0);
        }
        assert!(norm_inequality_check(4, 2.0, 1.0, 1, &mut rng).is_err());
    }

    #[test]
    fn pairing_examples() {
        let s = Arc::new(Spectrum::new(Manifold::Circle, 40).unwrap());
        let e = CoeffArray::unit(s.clone(), 1, 0).unwrap();
        let r = pairing(&e, &e).unwrap();
        assert_eq!(r.value, c(1.0));
        assert!(r.converged);
        let decay = CoeffArray::leading(s.clone(), |l| c((-(l as f64)).exp())).unwrap();
        let poly = CoeffArray::leading(s.clone(), |l| c((1 + l * l) as f64)).unwrap();
        assert!(pairing(&decay, &poly).unwrap().converged);
        let grow = CoeffArray::leading(s.clone(), |l| c((l as f64).exp())).unwrap();
        let r = pairing(&grow, &grow).unwrap();
        assert!(!r.converged);
        assert!(r.abs_partial_sums.windows(2).all(|w| w[0] <= w[1]));
        // bilinear, not sesquilinear
        let i = CoeffArray::unit(s, 2, 1).unwrap().scaled(Complex64::new(0.0, 1.0));
        assert_eq!(pairing(&i, &i).unwrap().value, c(-1.0));
    }

    #[test]
    fn duality_zero_partner() {
        let s = Arc::new(Spectrum::new(Manifold::Circle, 60).unwrap());
        let w = crate::weights::WeightSequence::gevrey(1.0, crate::weights::Variant::Roumieu).unwrap();
        let v = CoeffArray::leading(s.clone(), |l| c((-0.8 * l as f64).exp())).unwrap();
        let z = CoeffArray::zeros(s);
        let r = duality_equivalence_probe(&v, &z, &w, &LGrid::default(), DEFAULT_TOLERANCE).unwrap();
        assert_eq!((r.hs_sum, r.componentwise_sum), (0.0, 0.0));
        assert!(r.agree && r.hs_converged);
        assert_eq!(r.cs_violations, 0);
    }
}
