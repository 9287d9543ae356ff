//! Truncated block tensors of linear maps between coefficient arrays.

use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coeff::{last_quarter_converged, pairing, CoeffArray, PAIRING_CONVERGENCE};
use crate::error::{Error, Result};
use crate::spectral::{Manifold, Point, SpectralModel, Spectrum};

/// Share of output energy allowed in the top tenth of the model's blocks.
pub const ALIAS_ENERGY_FRACTION: f64 = 0.01;

const ENERGY_FLOOR: f64 = 1e-20;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Blocks `f_{kj}` of shape `d_k × d_j` for `k < K`, `j < J`; row `i` is the
/// output entry, column `l` the input entry.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorRep {
    out_spectrum: Arc<Spectrum>,
    in_spectrum: Arc<Spectrum>,
    blocks: Vec<Array2<Complex64>>,
}

impl TensorRep {
    /// `out_spectrum` has `K` blocks and `in_spectrum` has `J`; `blocks` is row-major in `(k, j)`.
    pub fn new(out_spectrum: Arc<Spectrum>, in_spectrum: Arc<Spectrum>, blocks: Vec<Array2<Complex64>>) -> Result<Self> {
        let (kk, jj) = (out_spectrum.len(), in_spectrum.len());
        if blocks.len() != kk * jj {
            return Err(Error::LengthMismatch { expected: kk * jj, actual: blocks.len() });
        }
        for (idx, b) in blocks.iter().enumerate() {
            let (k, j) = (idx / jj, idx % jj);
            let want = (out_spectrum.mult(k), in_spectrum.mult(j));
            if b.dim() != want {
                return Err(Error::Misaligned(format!("block ({k}, {j}) has shape {:?}, expected {want:?}", b.dim())));
            }
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite { block: idx });
            }
        }
        Ok(TensorRep { out_spectrum, in_spectrum, blocks })
    }

    pub fn zeros(out_spectrum: Arc<Spectrum>, in_spectrum: Arc<Spectrum>) -> Self {
        Self::from_fn(out_spectrum, in_spectrum, |_, _, shape| Array2::from_elem(shape, ZERO))
    }

    /// Builds block `(k, j)` from `f(k, j, (d_k, d_j))`. Panics if a block has the wrong shape.
    pub fn from_fn<F>(out_spectrum: Arc<Spectrum>, in_spectrum: Arc<Spectrum>, f: F) -> Self
    where
        F: Fn(usize, usize, (usize, usize)) -> Array2<Complex64>,
    {
        let mut blocks = Vec::with_capacity(out_spectrum.len() * in_spectrum.len());
        for k in 0..out_spectrum.len() {
            for j in 0..in_spectrum.len() {
                let shape = (out_spectrum.mult(k), in_spectrum.mult(j));
                let b = f(k, j, shape);
                assert_eq!(b.dim(), shape, "block ({k}, {j})");
                blocks.push(b);
            }
        }
        TensorRep { out_spectrum, in_spectrum, blocks }
    }

    /// Block-diagonal tensor with `σ(l)` on the diagonal.
    pub fn block_diagonal(spectrum: Arc<Spectrum>, sigma: &[Array2<Complex64>]) -> Result<Self> {
        if sigma.len() != spectrum.len() {
            return Err(Error::LengthMismatch { expected: spectrum.len(), actual: sigma.len() });
        }
        let mut blocks = Vec::with_capacity(spectrum.len().pow(2));
        for (k, sk) in sigma.iter().enumerate() {
            for j in 0..spectrum.len() {
                blocks.push(if k == j {
                    sk.clone()
                } else {
                    Array2::from_elem((spectrum.mult(k), spectrum.mult(j)), ZERO)
                });
            }
        }
        Self::new(Arc::clone(&spectrum), spectrum, blocks)
    }

    /// `K`, the number of output blocks.
    pub fn k(&self) -> usize {
        self.out_spectrum.len()
    }

    /// `J`, the number of input blocks.
    pub fn j(&self) -> usize {
        self.in_spectrum.len()
    }

    pub fn out_spectrum(&self) -> &Spectrum {
        &self.out_spectrum
    }

    pub fn in_spectrum(&self) -> &Spectrum {
        &self.in_spectrum
    }

    pub fn block(&self, k: usize, j: usize) -> &Array2<Complex64> {
        &self.blocks[k * self.j() + j]
    }

    pub fn blocks(&self) -> &[Array2<Complex64>] {
        &self.blocks
    }

    /// Frobenius norms `‖f_{kj}‖`, row-major.
    pub fn block_norms(&self) -> Array2<f64> {
        Array2::from_shape_fn((self.k(), self.j()), |(k, j)| {
            self.block(k, j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
        })
    }

    fn check_input(&self, u: &CoeffArray) -> Result<()> {
        if u.spectrum().manifold() != self.in_spectrum.manifold() || u.len() < self.j() {
            return Err(Error::Misaligned(format!(
                "tensor input is {} with J={}, array is {} with J={}",
                self.in_spectrum.manifold(),
                self.j(),
                u.spectrum().manifold(),
                u.len()
            )));
        }
        Ok(())
    }

    /// `(f(u))_k = Σ_{j<J} f_{kj} û(j)`; blocks of `u` beyond `J` are ignored.
    pub fn apply(&self, u: &CoeffArray) -> Result<CoeffArray> {
        self.check_input(u)?;
        let out: Vec<Vec<Complex64>> = (0..self.k())
            .into_par_iter()
            .map(|k| {
                let mut acc = vec![ZERO; self.out_spectrum.mult(k)];
                for j in 0..self.j() {
                    let b = self.block(k, j);
                    let x = u.block(j);
                    for (i, row) in b.rows().into_iter().enumerate() {
                        acc[i] += row.iter().zip(x).map(|(a, b)| a * b).sum::<Complex64>();
                    }
                }
                acc
            })
            .collect();
        CoeffArray::new(Arc::clone(&self.out_spectrum), out)
    }

    /// Plain blockwise transpose `S_{jk} = (f_{kj})^t`, no conjugation.
    pub fn adjoint_transpose(&self) -> TensorRep {
        let (kk, jj) = (self.k(), self.j());
        let mut blocks = Vec::with_capacity(kk * jj);
        for j in 0..jj {
            for k in 0..kk {
                blocks.push(self.block(k, j).t().to_owned());
            }
        }
        TensorRep { out_spectrum: Arc::clone(&self.in_spectrum), in_spectrum: Arc::clone(&self.out_spectrum), blocks }
    }

    pub fn add(&self, other: &TensorRep) -> Result<TensorRep> {
        if self.k() != other.k() || self.j() != other.j() || self.in_spectrum.manifold() != other.in_spectrum.manifold() {
            return Err(Error::Misaligned("tensors of different shape".into()));
        }
        let blocks = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect();
        Ok(TensorRep { blocks, ..self.clone() })
    }

    pub fn scaled(&self, alpha: Complex64) -> TensorRep {
        let blocks = self.blocks.iter().map(|b| b.mapv(|z| z * alpha)).collect();
        TensorRep { blocks, ..self.clone() }
    }
}

/// A linear map acting on functions sampled at a model's quadrature nodes.
pub trait SampledOperator: Sync {
    fn name(&self) -> &str;
    fn apply(&self, model: &SpectralModel, samples: &[Complex64]) -> Result<Vec<Complex64>>;
}

/// The model Laplacian, applied through the eigenexpansion.
#[derive(Clone, Copy, Debug, Default)]
pub struct Laplacian;

/// `d/dx` on the circle, `∂/∂x₁` on the torus, `∂/∂φ` on the sphere.
#[derive(Clone, Copy, Debug, Default)]
pub struct Derivative;

/// Multiplication by `cos x` (circle), `cos x₁` (torus) or `cos θ` (sphere).
#[derive(Clone, Copy, Debug, Default)]
pub struct MultiplyCos;

impl SampledOperator for Laplacian {
    fn name(&self) -> &str {
        "laplacian"
    }

    fn apply(&self, model: &SpectralModel, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let spec = model.spectrum();
        let mut c = model.analyze(samples)?;
        let off = spec.offsets();
        for l in 0..spec.len() {
            for z in &mut c[off[l]..off[l + 1]] {
                *z *= spec.lambda(l);
            }
        }
        model.synthesize(&c)
    }
}

/// Frequency of each `(cos, sin)` pair rotated by the derivative, as `(flat index of cos, frequency)`.
fn derivative_pairs(spec: &Spectrum) -> Vec<(usize, f64)> {
    let off = spec.offsets();
    let mut out = Vec::new();
    for (l, &o) in off.iter().enumerate().take(spec.len()).skip(1) {
        match spec.manifold() {
            Manifold::Circle => out.push((o, l as f64)),
            Manifold::Torus2 => {
                for (r, &(m1, _)) in spec.torus_representatives(l).iter().enumerate() {
                    out.push((o + 2 * r, m1 as f64));
                }
            }
            Manifold::Sphere2 => {
                for m in 1..=l {
                    out.push((o + 2 * m - 1, m as f64));
                }
            }
        }
    }
    out
}

impl SampledOperator for Derivative {
    fn name(&self) -> &str {
        "derivative"
    }

    fn apply(&self, model: &SpectralModel, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let c = model.analyze(samples)?;
        let mut d = vec![ZERO; c.len()];
        // (a cos + b sin)' = f b cos − f a sin
        for (i, f) in derivative_pairs(model.spectrum()) {
            d[i] = c[i + 1] * f;
            d[i + 1] = -c[i] * f;
        }
        model.synthesize(&d)
    }
}

impl SampledOperator for MultiplyCos {
    fn name(&self) -> &str {
        "multiply_cos"
    }

    fn apply(&self, model: &SpectralModel, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        let nodes = model.nodes();
        if samples.len() != nodes.len() {
            return Err(Error::LengthMismatch { expected: nodes.len(), actual: samples.len() });
        }
        Ok(nodes
            .iter()
            .zip(samples)
            .map(|(p, &s)| {
                let g = match *p {
                    Point::Angle(x) | Point::AnglePair(x, _) => x.cos(),
                    Point::Unit(v) => v[2],
                };
                s * g
            })
            .collect())
    }
}

/// Looks up one of the catalog operators by name.
pub fn operator_by_name(name: &str) -> Result<Box<dyn SampledOperator>> {
    match name {
        "laplacian" => Ok(Box::new(Laplacian)),
        "derivative" => Ok(Box::new(Derivative)),
        "multiply_cos" => Ok(Box::new(MultiplyCos)),
        other => Err(Error::InvalidArgument(format!("unknown operator {other:?}"))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AliasReport {
    /// Largest share of a column's output energy in the top tenth of the model's blocks.
    pub max_top_fraction: f64,
    /// Largest relative gap between the quadrature norm of a column and its coefficient norm.
    pub max_energy_defect: f64,
    pub warnings: Vec<String>,
}

impl AliasReport {
    pub fn aliased(&self) -> bool {
        !self.warnings.is_empty()
    }
}

/// Tensor of `op` with `K` output and `J` input blocks: column `(j, l)` is the
/// analysis of `op(e_j^l)` restricted to blocks below `K`.
pub fn from_basis_action(op: &dyn SampledOperator, model: &SpectralModel, k: usize, j: usize) -> Result<(TensorRep, AliasReport)> {
    let spec = model.spectrum();
    if k == 0 || j == 0 || k > spec.len() || j > spec.len() {
        return Err(Error::IndexOutOfRange(format!("K={k}, J={j} with model J={}", spec.len())));
    }
    let out_spec = Arc::new(spec.truncated(k)?);
    let in_spec = Arc::new(spec.truncated(j)?);
    let off = spec.offsets();
    let top_start = spec.len() - spec.len().div_ceil(10);
    let columns: Vec<(usize, usize)> = (0..j).flat_map(|jj| (0..spec.mult(jj)).map(move |l| (jj, l))).collect();
    let results: Vec<(Vec<Complex64>, f64, f64)> = columns
        .par_iter()
        .map(|&(jj, l)| -> Result<_> {
            let e: Vec<Complex64> = model.basis_samples(jj, l)?.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
            let out = op.apply(model, &e)?;
            let c = model.analyze(&out)?;
            let energy: f64 = c.iter().map(|z| z.norm_sqr()).sum();
            let top: f64 = c[off[top_start]..].iter().map(|z| z.norm_sqr()).sum();
            let quad = model.inner_product(&out, &out)?.re;
            // basis columns have unit norm; a null column carries only round-off
            let frac = if energy > ENERGY_FLOOR { top / energy } else { 0.0 };
            let defect = if quad > ENERGY_FLOOR { (quad - energy).abs() / quad } else { 0.0 };
            Ok((c, frac, defect))
        })
        .collect::<Result<_>>()?;
    let mut blocks = Vec::with_capacity(k * j);
    for kk in 0..k {
        for jj in 0..j {
            let mut b = Array2::from_elem((spec.mult(kk), spec.mult(jj)), ZERO);
            let col0 = off[jj];
            for l in 0..spec.mult(jj) {
                let c = &results[col0 + l].0;
                for i in 0..spec.mult(kk) {
                    b[[i, l]] = c[off[kk] + i];
                }
            }
            blocks.push(b);
        }
    }
    let max_top_fraction = results.iter().map(|r| r.1).fold(0.0, f64::max);
    let max_energy_defect = results.iter().map(|r| r.2).fold(0.0, f64::max);
    let mut warnings = Vec::new();
    if max_top_fraction > ALIAS_ENERGY_FRACTION {
        warnings.push(format!(
            "{}: {:.3e} of a column's energy lies in the top 10% of blocks; enlarge the model J",
            op.name(),
            max_top_fraction
        ));
    }
    if max_energy_defect > 1e-8 {
        warnings.push(format!(
            "{}: output leaves the resolved band (energy defect {:.3e})",
            op.name(),
            max_energy_defect
        ));
    }
    let t = TensorRep::new(out_spec, in_spec, blocks)?;
    Ok((t, AliasReport { max_top_fraction, max_energy_defect, warnings }))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdjointnessReport {
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub residual: f64,
    /// Floating-point budget of the two finite sums.
    pub roundoff_bound: f64,
    /// Bound on the contribution of operand blocks beyond the tensor truncation.
    pub tail_estimate: f64,
    pub truncation_dominated: bool,
}

/// `|⟨f(u), v⟩ − ⟨u, f̂(v)⟩|` at the tensor's truncation.
pub fn adjointness_residual(t: &TensorRep, u: &CoeffArray, v: &CoeffArray) -> Result<AdjointnessReport> {
    let tt = t.adjoint_transpose();
    tt.check_input(v)?;
    let fu = t.apply(u)?;
    let v_k = truncate(v, t.k())?;
    let u_j = truncate(u, t.j())?;
    let lhs = pairing(&fu, &v_k)?.value;
    let rhs = pairing(&u_j, &tt.apply(v)?)?.value;
    let norms = t.block_norms();
    let mut abs = 0.0;
    for k in 0..t.k() {
        for jj in 0..t.j() {
            abs += norms[[k, jj]] * u.hs_norm(jj) * v.hs_norm(k);
        }
    }
    let dims = (t.out_spectrum.total_dim() + t.in_spectrum.total_dim()) as f64;
    let roundoff_bound = 4.0 * f64::EPSILON * dims * abs.max(f64::MIN_POSITIVE);
    let fmax = norms.iter().copied().fold(0.0, f64::max);
    let tail = |a: &CoeffArray, from: usize| (from..a.len()).map(|l| a.hs_norm(l)).sum::<f64>();
    let head = |a: &CoeffArray, to: usize| (0..to.min(a.len())).map(|l| a.hs_norm(l)).sum::<f64>();
    let tail_estimate = fmax * (tail(u, t.j()) * head(v, t.k()) + tail(v, t.k()) * head(u, t.j()));
    let residual = (lhs - rhs).norm();
    Ok(AdjointnessReport {
        lhs,
        rhs,
        residual,
        roundoff_bound,
        tail_estimate,
        truncation_dominated: tail_estimate > roundoff_bound,
    })
}

fn truncate(a: &CoeffArray, n: usize) -> Result<CoeffArray> {
    if a.len() < n {
        return Err(Error::Misaligned(format!("array has {} blocks, need {n}", a.len())));
    }
    let s = Arc::new(a.spectrum().truncated(n)?);
    CoeffArray::new(s, a.blocks()[..n].to_vec())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SequentialityReport {
    /// Row sums `Σ_j Σ_l |f_{kjli}| |û(j,l)|`, one per output entry.
    pub row_sums: Vec<f64>,
    /// Stabilization of the rows in the first half of the output blocks.
    pub rows_stable: bool,
    /// Largest last-quarter relative increment among those rows.
    pub worst_row_increment: f64,
    /// `Σ_k Σ_i |v_{k,i}| Σ_{j<n} ...` for `n = 1..=J`.
    pub weighted_partial_sums: Vec<f64>,
    pub weighted_stable: bool,
}

/// Partial-sum stabilization of the absolute tensor sums against `u` and `v`.
pub fn sequentiality_probe(t: &TensorRep, u: &CoeffArray, v: &CoeffArray) -> Result<SequentialityReport> {
    t.check_input(u)?;
    t.adjoint_transpose().check_input(v)?;
    let (kk, jj) = (t.k(), t.j());
    // partial[r][n] = Σ_{j ≤ n} Σ_l |f_{kjli}| |û(j,l)| for output entry r = (k, i)
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut row_weights = Vec::new();
    for k in 0..kk {
        for i in 0..t.out_spectrum.mult(k) {
            let mut acc = 0.0;
            let mut partial = Vec::with_capacity(jj);
            for j in 0..jj {
                acc += t.block(k, j).row(i).iter().zip(u.block(j)).map(|(a, b)| a.norm() * b.norm()).sum::<f64>();
                partial.push(acc);
            }
            rows.push(partial);
            row_weights.push(v.block(k)[i].norm());
        }
    }
    let increments: Vec<f64> = rows
        .iter()
        .map(|p| {
            let last = *p.last().unwrap_or(&0.0);
            if last == 0.0 {
                0.0
            } else {
                let at = p.len() - p.len() / 4;
                (last - if at == 0 { 0.0 } else { p[at - 1] }) / last
            }
        })
        .collect();
    // rows near the output truncation pick up their band only at the last columns
    let judged = t.out_spectrum.offsets()[kk.div_ceil(2)];
    let rows_stable = rows[..judged].iter().all(|p| last_quarter_converged(p, PAIRING_CONVERGENCE));
    let worst_row_increment = increments[..judged].iter().copied().fold(0.0, f64::max);
    let weighted_partial_sums: Vec<f64> =
        (0..jj).map(|n| rows.iter().zip(&row_weights).map(|(p, w)| w * p[n]).sum()).collect();
    let weighted_stable = last_quarter_converged(&weighted_partial_sums, PAIRING_CONVERGENCE);
    Ok(SequentialityReport {
        row_sums: rows.iter().map(|p| *p.last().unwrap_or(&0.0)).collect(),
        rows_stable,
        worst_row_increment,
        weighted_partial_sums,
        weighted_stable,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MultiplierResult {
    Accepted { off_diagonal_ratio: f64, sigma: Vec<Vec<Vec<(f64, f64)>>> },
    Rejected { off_diagonal_ratio: f64 },
}

impl MultiplierResult {
    pub fn off_diagonal_ratio(&self) -> f64 {
        match self {
            MultiplierResult::Accepted { off_diagonal_ratio, .. } | MultiplierResult::Rejected { off_diagonal_ratio } => {
                *off_diagonal_ratio
            }
        }
    }

    /// `σ(l)` as matrices, if accepted.
    pub fn sigma(&self) -> Option<Vec<Array2<Complex64>>> {
        match self {
            MultiplierResult::Accepted { sigma, .. } => Some(
                sigma
                    .iter()
                    .map(|m| {
                        let (r, c) = (m.len(), m.first().map_or(0, Vec::len));
                        Array2::from_shape_fn((r, c), |(i, l)| Complex64::new(m[i][l].0, m[i][l].1))
                    })
                    .collect(),
            ),
            MultiplierResult::Rejected { .. } => None,
        }
    }
}

/// Share of `Σ ‖f_{kj}‖²` off the block diagonal, and the diagonal blocks when it is within `tol`.
pub fn multiplier_extract(t: &TensorRep, tol: f64) -> Result<MultiplierResult> {
    if t.k() != t.j() || t.in_spectrum.manifold() != t.out_spectrum.manifold() {
        return Err(Error::Misaligned("multiplier test needs a square tensor on one model".into()));
    }
    let norms = t.block_norms();
    let mut total = 0.0;
    let mut off = 0.0;
    for ((k, j), &n) in norms.indexed_iter() {
        total += n * n;
        if k != j {
            off += n * n;
        }
    }
    let ratio = if total == 0.0 { 0.0 } else { off / total };
    if ratio > tol {
        return Ok(MultiplierResult::Rejected { off_diagonal_ratio: ratio });
    }
    let sigma = (0..t.k())
        .map(|l| t.block(l, l).rows().into_iter().map(|r| r.iter().map(|z| (z.re, z.im)).collect()).collect())
        .collect();
    Ok(MultiplierResult::Accepted { off_diagonal_ratio: ratio, sigma })
}
