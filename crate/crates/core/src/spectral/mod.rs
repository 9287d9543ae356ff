//! Closed-form spectra and orthonormal eigenbases on the circle, the flat
//! 2-torus and the round 2-sphere.

pub mod lattice;
pub mod legendre;
mod model;
pub mod quadrature;

pub use model::{ModelDescriptor, Point, QuadratureSize, SpectralModel, ORTHONORMALITY_TOLERANCE};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::ls_slope;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Manifold {
    Circle,
    Torus2,
    Sphere2,
}

impl Manifold {
    pub fn dimension(self) -> usize {
        match self {
            Manifold::Circle => 1,
            Manifold::Torus2 | Manifold::Sphere2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Manifold::Circle => "circle",
            Manifold::Torus2 => "torus2",
            Manifold::Sphere2 => "sphere2",
        }
    }
}

impl std::fmt::Display for Manifold {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Distinct Laplacian eigenvalues `λ_0 = 0 < λ_1 < ...` with multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    manifold: Manifold,
    lambdas: Vec<f64>,
    mults: Vec<usize>,
    offsets: Vec<usize>,
    torus_reps: Vec<Vec<(i64, i64)>>,
}

impl Spectrum {
    /// The first `j` distinct eigenvalues.
    pub fn new(manifold: Manifold, j: usize) -> Result<Self> {
        if j == 0 {
            return Err(Error::InvalidArgument("J must be at least 1".into()));
        }
        let mut torus_reps = Vec::new();
        let (lambdas, mults): (Vec<f64>, Vec<usize>) = match manifold {
            Manifold::Circle => (0..j)
                .map(|i| ((i * i) as f64, if i == 0 { 1 } else { 2 }))
                .unzip(),
            Manifold::Sphere2 => (0..j).map(|i| ((i * (i + 1)) as f64, 2 * i + 1)).unzip(),
            Manifold::Torus2 => {
                let levels = lattice::torus_levels(j);
                let out = levels.iter().map(|l| (l.norm2 as f64, l.count())).unzip();
                torus_reps = levels.into_iter().map(|l| l.representatives).collect();
                out
            }
        };
        let mut offsets = Vec::with_capacity(j + 1);
        let mut acc = 0;
        for &d in &mults {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        Ok(Spectrum { manifold, lambdas, mults, offsets, torus_reps })
    }

    pub fn manifold(&self) -> Manifold {
        self.manifold
    }

    /// Dimension `n` of the manifold.
    pub fn dimension(&self) -> usize {
        self.manifold.dimension()
    }

    /// Order `ν` of the operator, 2 for the Laplacian.
    pub fn nu(&self) -> f64 {
        2.0
    }

    /// Number `J` of retained eigenvalues.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn mults(&self) -> &[usize] {
        &self.mults
    }

    pub fn lambda(&self, j: usize) -> f64 {
        self.lambdas[j]
    }

    pub fn mult(&self, j: usize) -> usize {
        self.mults[j]
    }

    /// `λ_j^{1/ν}`.
    pub fn root(&self, j: usize) -> f64 {
        self.lambdas[j].powf(1.0 / self.nu())
    }

    /// Start of block `j` in the flattened coefficient vector; `offsets()[J]` is the total.
    pub fn offsets(&self) -> &[usize] {
        &self.offsets
    }

    pub fn total_dim(&self) -> usize {
        self.offsets[self.len()]
    }

    /// Lattice representatives of eigenspace `j` on the torus, empty otherwise.
    pub fn torus_representatives(&self, j: usize) -> &[(i64, i64)] {
        self.torus_reps.get(j).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Same manifold with the first `j` eigenvalues.
    pub fn truncated(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.len() {
            return Err(Error::IndexOutOfRange(format!("cannot truncate J={} to {j}", self.len())));
        }
        let mut s = self.clone();
        s.lambdas.truncate(j);
        s.mults.truncate(j);
        s.offsets.truncate(j + 1);
        s.torus_reps.truncate(j);
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeylReport {
    pub exponent: f64,
    pub sup: f64,
    pub argmax: usize,
    pub running_sup: Vec<f64>,
}

impl WeylReport {
    /// True when the running sup does not grow over the final `fraction` of the range.
    pub fn stable_over(&self, fraction: f64) -> bool {
        let n = self.running_sup.len();
        let start = ((n as f64) * (1.0 - fraction)).floor() as usize;
        let start = start.min(n.saturating_sub(1));
        self.running_sup[n - 1] <= self.running_sup[start]
    }
}

/// `sup_j d_j / (1 + λ_j)^{n/ν}` over the retained range.
pub fn weyl_multiplicity_check(spec: &Spectrum) -> WeylReport {
    let exponent = spec.dimension() as f64 / spec.nu();
    let mut sup = f64::NEG_INFINITY;
    let mut argmax = 0;
    let mut running_sup = Vec::with_capacity(spec.len());
    for j in 0..spec.len() {
        let r = spec.mult(j) as f64 / (1.0 + spec.lambda(j)).powf(exponent);
        if r > sup {
            sup = r;
            argmax = j;
        }
        running_sup.push(sup);
    }
    WeylReport { exponent, sup, argmax, running_sup }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Converged,
    Diverging,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummabilityReport {
    pub q: f64,
    pub partial_sum: f64,
    /// Growth over the last quarter of the range relative to the full sum.
    pub last_quarter_increment: f64,
    /// Log-log slope of dyadic bin sums `Σ_{2^k ≤ λ_j < 2^{k+1}} term_j` against `2^k`,
    /// fitted over the upper half of the complete bins.
    pub bin_slope: f64,
    pub bins: usize,
    pub verdict: Verdict,
}

/// Bin sums must shrink at least like `λ^{-SUMMABILITY_MARGIN}` to count as convergent.
pub const SUMMABILITY_MARGIN: f64 = 0.05;

/// Partial sums of `d_j (1 + λ_j)^{-q}` over the first `j_max` eigenvalues.
///
/// Binning in λ rather than in `j` keeps slowly varying factors in the
/// counting function out of the fitted slope.
pub fn summability_probe(spec: &Spectrum, q: f64, j_max: usize) -> Result<SummabilityReport> {
    if q <= 0.0 || !q.is_finite() {
        return Err(Error::InvalidArgument(format!("q must be positive, got {q}")));
    }
    let n = j_max.min(spec.len());
    let term = |j: usize| spec.mult(j) as f64 * (1.0 + spec.lambda(j)).powf(-q);
    let mut sum = 0.0;
    let mut sum_at_3q = 0.0;
    let q3 = n - n / 4;
    for j in 0..n {
        if j == q3 {
            sum_at_3q = sum;
        }
        sum += term(j);
    }

    // A bin is complete once its upper edge does not exceed the last retained eigenvalue.
    let top = if n > 0 { spec.lambda(n - 1) } else { 0.0 };
    let mut bin_sums: Vec<(f64, f64)> = Vec::new();
    let mut lo = 1.0f64;
    let mut j = 0;
    while 2.0 * lo <= top {
        let hi = 2.0 * lo;
        let mut b = 0.0;
        while j < n && spec.lambda(j) < hi {
            if spec.lambda(j) >= lo {
                b += term(j);
            }
            j += 1;
        }
        if b > 0.0 {
            bin_sums.push((lo.ln(), b.ln()));
        }
        lo = hi;
    }
    if bin_sums.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "summability probe needs at least 3 complete dyadic bins, got {}",
            bin_sums.len()
        )));
    }
    let start = (bin_sums.len() / 2).min(bin_sums.len() - 3);
    let bin_slope = ls_slope(&bin_sums[start..]);
    let verdict = if bin_slope < -SUMMABILITY_MARGIN {
        Verdict::Converged
    } else {
        Verdict::Diverging
    };
    Ok(SummabilityReport {
        q,
        partial_sum: sum,
        last_quarter_increment: (sum - sum_at_3q) / sum,
        bin_slope,
        bins: bin_sums.len(),
        verdict,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SupNormReport {
    pub exponent: f64,
    pub sup: f64,
    pub argmax: usize,
    /// Ratio for each block, `per_block[0]` belongs to `l = 1`.
    pub per_block: Vec<f64>,
}

/// `max_k ‖e_l^k‖_∞ / λ_l^{(n-1)/(2ν)}` for `l ≥ 1`, sup norm taken on the grid.
pub fn supnorm_ratio_check(model: &SpectralModel) -> SupNormReport {
    let spec = model.spectrum();
    let exponent = (spec.dimension() as f64 - 1.0) / (2.0 * spec.nu());
    let maxima = model.block_sup_norms();
    let per_block: Vec<f64> = (1..spec.len())
        .map(|l| maxima[l] / spec.lambda(l).powf(exponent))
        .collect();
    let (argmax, sup) = per_block
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i + 1, v) } else { acc });
    SupNormReport { exponent, sup, argmax, per_block }
}
