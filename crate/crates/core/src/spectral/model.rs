use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use ndarray::{Array1, Array2, ArrayView1, Axis};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::legendre::{lm_index, normalized_table};
use super::quadrature::gauss_legendre;
use super::{Manifold, Spectrum};
use crate::error::{Error, Result};

pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;

/// A point on one of the model manifolds.
///
/// The sphere accepts either a (not necessarily unit) vector in R³ or a
/// `(colatitude, azimuth)` pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Point {
    Angle(f64),
    AnglePair(f64, f64),
    Unit([f64; 3]),
}

/// Quadrature resolution: `N` (circle nodes, torus `N × N`, sphere `N × 2N`)
/// or an explicit pair (torus `N1 × N2`, sphere `Nθ × Nφ`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuadratureSize {
    Uniform(usize),
    Product([usize; 2]),
}

impl QuadratureSize {
    /// Smallest grid integrating every product of two retained basis functions exactly.
    pub fn minimal(spec: &Spectrum) -> Self {
        let j = spec.len();
        match spec.manifold() {
            Manifold::Circle => QuadratureSize::Uniform(2 * j - 1),
            Manifold::Torus2 => {
                let f = (0..j)
                    .flat_map(|b| spec.torus_representatives(b).iter())
                    .map(|&(a, b)| a.unsigned_abs().max(b.unsigned_abs()) as usize)
                    .max()
                    .unwrap_or(0);
                QuadratureSize::Uniform(2 * f + 1)
            }
            Manifold::Sphere2 => QuadratureSize::Product([j, 2 * j - 1]),
        }
    }

    fn resolve(self, manifold: Manifold) -> Result<Self> {
        let r = match (manifold, self) {
            (Manifold::Circle, QuadratureSize::Product(_)) => {
                return Err(Error::InvalidArgument("circle quadrature takes a single size".into()))
            }
            (Manifold::Torus2, QuadratureSize::Uniform(n)) => QuadratureSize::Product([n, n]),
            (Manifold::Sphere2, QuadratureSize::Uniform(n)) => QuadratureSize::Product([n, 2 * n]),
            (_, q) => q,
        };
        let ok = match r {
            QuadratureSize::Uniform(n) => n > 0,
            QuadratureSize::Product([a, b]) => a > 0 && b > 0,
        };
        if !ok {
            return Err(Error::InvalidArgument("quadrature size must be positive".into()));
        }
        Ok(r)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelDescriptor {
    pub manifold: Manifold,
    #[serde(rename = "J")]
    pub j: usize,
    pub n: usize,
    pub nu: f64,
    pub lambdas: Vec<f64>,
    pub mults: Vec<usize>,
    pub quadrature_size: QuadratureSize,
    pub orthonormality_residual: f64,
    pub basis_labels: Vec<Vec<String>>,
}

#[derive(Clone, Debug)]
struct DenseGrid {
    nodes: Vec<Point>,
    weights: Vec<f64>,
    /// Basis functions (rows, flattened block order) sampled on the nodes (columns).
    basis: Array2<f64>,
}

#[derive(Clone, Debug)]
struct SphereGrid {
    n_phi: usize,
    cos_theta: Vec<f64>,
    gl_weights: Vec<f64>,
    phi: Vec<f64>,
    /// `p(l, m)` at each Gauss node, rows indexed by `lm_index`.
    legendre: Array2<f64>,
    /// Row `t`: 1, then `cos(mφ)`, `sin(mφ)` for `t = 2m - 1`, `2m`.
    trig: Array2<f64>,
}

impl SphereGrid {
    fn n_theta(&self) -> usize {
        self.cos_theta.len()
    }

    fn phi_weight(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }
}

#[derive(Clone, Debug)]
enum Grid {
    Dense(DenseGrid),
    Sphere(SphereGrid),
}

/// Eigenbasis and quadrature for a fixed truncation `J`.
#[derive(Clone, Debug)]
pub struct SpectralModel {
    spectrum: Arc<Spectrum>,
    quadrature_size: QuadratureSize,
    grid: Grid,
    orthonormality_residual: f64,
}

#[inline]
fn sphere_m(k: usize) -> usize {
    k.div_ceil(2)
}

#[inline]
fn sphere_factor(k: usize) -> f64 {
    if k == 0 {
        1.0
    } else {
        SQRT_2
    }
}

fn trig_value(t: usize, phi: f64) -> f64 {
    let m = sphere_m(t) as f64;
    match t {
        0 => 1.0,
        t if t % 2 == 1 => (m * phi).cos(),
        _ => (m * phi).sin(),
    }
}

fn split(v: &[Complex64]) -> (Array1<f64>, Array1<f64>) {
    (v.iter().map(|z| z.re).collect(), v.iter().map(|z| z.im).collect())
}

fn join(re: ArrayView1<f64>, im: ArrayView1<f64>) -> Vec<Complex64> {
    re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
}

impl SpectralModel {
    /// Builds the model and checks discrete orthonormality.
    pub fn build(manifold: Manifold, j: usize, quadrature_size: QuadratureSize) -> Result<Self> {
        let spectrum = Arc::new(Spectrum::new(manifold, j)?);
        let model = Self::assemble(spectrum, quadrature_size)?;
        if model.orthonormality_residual > ORTHONORMALITY_TOLERANCE {
            return Err(Error::QuadratureUnderresolved {
                residual: model.orthonormality_residual,
                tolerance: ORTHONORMALITY_TOLERANCE,
            });
        }
        Ok(model)
    }

    /// Builds with the smallest exact quadrature.
    pub fn build_minimal(manifold: Manifold, j: usize) -> Result<Self> {
        let spectrum = Spectrum::new(manifold, j)?;
        let q = QuadratureSize::minimal(&spectrum);
        Self::build(manifold, j, q)
    }

    /// Builds without rejecting an underresolved grid; the residual is still recorded.
    pub fn build_unchecked(manifold: Manifold, j: usize, quadrature_size: QuadratureSize) -> Result<Self> {
        Self::assemble(Arc::new(Spectrum::new(manifold, j)?), quadrature_size)
    }

    fn assemble(spectrum: Arc<Spectrum>, quadrature_size: QuadratureSize) -> Result<Self> {
        let q = quadrature_size.resolve(spectrum.manifold())?;
        let grid = match (spectrum.manifold(), q) {
            (Manifold::Circle, QuadratureSize::Uniform(n)) => {
                let h = 2.0 * PI / n as f64;
                let nodes: Vec<Point> = (0..n).map(|i| Point::Angle(i as f64 * h)).collect();
                Grid::Dense(Self::dense_grid(&spectrum, nodes, vec![h; n]))
            }
            (Manifold::Torus2, QuadratureSize::Product([n1, n2])) => {
                let (h1, h2) = (2.0 * PI / n1 as f64, 2.0 * PI / n2 as f64);
                let mut nodes = Vec::with_capacity(n1 * n2);
                for a in 0..n1 {
                    for b in 0..n2 {
                        nodes.push(Point::AnglePair(a as f64 * h1, b as f64 * h2));
                    }
                }
                Grid::Dense(Self::dense_grid(&spectrum, nodes, vec![h1 * h2; n1 * n2]))
            }
            (Manifold::Sphere2, QuadratureSize::Product([nt, np])) => {
                Grid::Sphere(Self::sphere_grid(&spectrum, nt, np))
            }
            _ => unreachable!("quadrature size resolved per manifold"),
        };
        let mut model = SpectralModel { spectrum, quadrature_size: q, grid, orthonormality_residual: 0.0 };
        model.orthonormality_residual = model.gram_residual();
        Ok(model)
    }

    fn dense_grid(spec: &Spectrum, nodes: Vec<Point>, weights: Vec<f64>) -> DenseGrid {
        let nb = spec.total_dim();
        let mut basis = Array2::zeros((nb, nodes.len()));
        for (c, p) in nodes.iter().enumerate() {
            let col = Self::dense_basis_at(spec, p).expect("grid nodes match manifold");
            for (r, v) in col.into_iter().enumerate() {
                basis[[r, c]] = v;
            }
        }
        DenseGrid { nodes, weights, basis }
    }

    fn sphere_grid(spec: &Spectrum, nt: usize, np: usize) -> SphereGrid {
        let j = spec.len();
        let (cos_theta, gl_weights) = gauss_legendre(nt);
        let n_lm = j * (j + 1) / 2;
        let mut legendre = Array2::zeros((n_lm, nt));
        for (i, &x) in cos_theta.iter().enumerate() {
            for (r, v) in normalized_table(j, x).into_iter().enumerate() {
                legendre[[r, i]] = v;
            }
        }
        let phi: Vec<f64> = (0..np).map(|i| 2.0 * PI * i as f64 / np as f64).collect();
        let nt_rows = 2 * j - 1;
        let trig = Array2::from_shape_fn((nt_rows, np), |(t, c)| trig_value(t, phi[c]));
        SphereGrid { n_phi: np, cos_theta, gl_weights, phi, legendre, trig }
    }

    fn dense_basis_at(spec: &Spectrum, p: &Point) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(spec.total_dim());
        match (spec.manifold(), *p) {
            (Manifold::Circle, Point::Angle(x)) => {
                out.push(1.0 / (2.0 * PI).sqrt());
                let c = 1.0 / PI.sqrt();
                for j in 1..spec.len() {
                    let (s, co) = (j as f64 * x).sin_cos();
                    out.push(c * co);
                    out.push(c * s);
                }
            }
            (Manifold::Torus2, Point::AnglePair(x1, x2)) => {
                out.push(1.0 / (2.0 * PI));
                let c = 1.0 / (PI * SQRT_2);
                for j in 1..spec.len() {
                    for &(m1, m2) in spec.torus_representatives(j) {
                        let (s, co) = (m1 as f64 * x1 + m2 as f64 * x2).sin_cos();
                        out.push(c * co);
                        out.push(c * s);
                    }
                }
            }
            (m, _) => return Err(Error::InvalidArgument(format!("point {p:?} does not lie on {m}"))),
        }
        Ok(out)
    }

    fn sphere_coords(p: &Point) -> Result<(f64, f64)> {
        match *p {
            Point::AnglePair(theta, phi) => Ok((theta.cos(), phi)),
            Point::Unit(v) => {
                let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                if r == 0.0 || !r.is_finite() {
                    return Err(Error::InvalidArgument("zero vector is not a point on the sphere".into()));
                }
                Ok(((v[2] / r).clamp(-1.0, 1.0), v[1].atan2(v[0])))
            }
            Point::Angle(_) => Err(Error::InvalidArgument(format!("point {p:?} does not lie on sphere2"))),
        }
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn spectrum_arc(&self) -> Arc<Spectrum> {
        Arc::clone(&self.spectrum)
    }

    pub fn manifold(&self) -> Manifold {
        self.spectrum.manifold()
    }

    pub fn quadrature_size(&self) -> QuadratureSize {
        self.quadrature_size
    }

    /// Max entry of `|G - I|` for the discrete Gram matrix.
    pub fn orthonormality_residual(&self) -> f64 {
        self.orthonormality_residual
    }

    pub fn node_count(&self) -> usize {
        match &self.grid {
            Grid::Dense(g) => g.nodes.len(),
            Grid::Sphere(g) => g.n_theta() * g.n_phi,
        }
    }

    /// Quadrature nodes; on the sphere these run colatitude-major.
    pub fn nodes(&self) -> Vec<Point> {
        match &self.grid {
            Grid::Dense(g) => g.nodes.clone(),
            Grid::Sphere(g) => {
                let mut out = Vec::with_capacity(self.node_count());
                for &x in &g.cos_theta {
                    let s = (1.0 - x * x).max(0.0).sqrt();
                    for &phi in &g.phi {
                        out.push(Point::Unit([s * phi.cos(), s * phi.sin(), x]));
                    }
                }
                out
            }
        }
    }

    pub fn weights(&self) -> Vec<f64> {
        match &self.grid {
            Grid::Dense(g) => g.weights.clone(),
            Grid::Sphere(g) => {
                let h = g.phi_weight();
                g.gl_weights.iter().flat_map(|&w| std::iter::repeat_n(w * h, g.n_phi)).collect()
            }
        }
    }

    /// Samples `f` on the quadrature nodes.
    pub fn sample<F: Fn(&Point) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        self.nodes().iter().map(f).collect()
    }

    fn check_block(&self, j: usize, k: usize) -> Result<()> {
        let spec = &self.spectrum;
        if j >= spec.len() {
            return Err(Error::IndexOutOfRange(format!("block {j} with J = {}", spec.len())));
        }
        if k >= spec.mult(j) {
            return Err(Error::IndexOutOfRange(format!("k = {k} in block {j} of dimension {}", spec.mult(j))));
        }
        Ok(())
    }

    /// Value of `e_j^k` at `p`; `j` and `k` are zero-based.
    pub fn eval_basis(&self, j: usize, k: usize, p: &Point) -> Result<f64> {
        self.check_block(j, k)?;
        let spec = &self.spectrum;
        match spec.manifold() {
            Manifold::Circle | Manifold::Torus2 => {
                // cheap enough for point evaluation
                let all = Self::dense_basis_at(spec, p)?;
                Ok(all[spec.offsets()[j] + k])
            }
            Manifold::Sphere2 => {
                let (x, phi) = Self::sphere_coords(p)?;
                let table = normalized_table(j + 1, x);
                let m = sphere_m(k);
                Ok(table[lm_index(j, m)] * sphere_factor(k) * trig_value(k, phi))
            }
        }
    }

    /// All basis functions at `p`, flattened in block order.
    pub fn basis_at(&self, p: &Point) -> Result<Vec<f64>> {
        let spec = &self.spectrum;
        match spec.manifold() {
            Manifold::Circle | Manifold::Torus2 => Self::dense_basis_at(spec, p),
            Manifold::Sphere2 => {
                let (x, phi) = Self::sphere_coords(p)?;
                let table = normalized_table(spec.len(), x);
                let mut out = Vec::with_capacity(spec.total_dim());
                for l in 0..spec.len() {
                    for k in 0..=2 * l {
                        out.push(table[lm_index(l, sphere_m(k))] * sphere_factor(k) * trig_value(k, phi));
                    }
                }
                Ok(out)
            }
        }
    }

    /// `e_j^k` sampled on the nodes.
    pub fn basis_samples(&self, j: usize, k: usize) -> Result<Vec<f64>> {
        self.check_block(j, k)?;
        let flat = self.spectrum.offsets()[j] + k;
        Ok(match &self.grid {
            Grid::Dense(g) => g.basis.row(flat).to_vec(),
            Grid::Sphere(g) => {
                let m = sphere_m(k);
                let c = sphere_factor(k);
                let p = g.legendre.row(lm_index(j, m));
                let t = g.trig.row(k);
                p.iter().flat_map(|&pv| t.iter().map(move |&tv| c * pv * tv)).collect()
            }
        })
    }

    fn check_samples(&self, len: usize) -> Result<()> {
        if len != self.node_count() {
            return Err(Error::LengthMismatch { expected: self.node_count(), actual: len });
        }
        Ok(())
    }

    /// Quadrature `Σ w f conj(g)`.
    pub fn inner_product(&self, f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
        self.check_samples(f.len())?;
        self.check_samples(g.len())?;
        Ok(self.weights().iter().zip(f).zip(g).map(|((&w, a), b)| w * a * b.conj()).sum())
    }

    /// Coefficients `(f, e_j^k)` of node samples, flattened in block order.
    pub fn analyze(&self, samples: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_samples(samples.len())?;
        Ok(match &self.grid {
            Grid::Dense(g) => {
                let w = ArrayView1::from(&g.weights[..]);
                let (re, im) = split(samples);
                let re = g.basis.dot(&(&re * &w));
                let im = g.basis.dot(&(&im * &w));
                join(re.view(), im.view())
            }
            Grid::Sphere(g) => {
                let (nt, np) = (g.n_theta(), g.n_phi);
                let (re, im) = split(samples);
                let re = re.into_shape_with_order((nt, np)).expect("θ-major samples");
                let im = im.into_shape_with_order((nt, np)).expect("θ-major samples");
                let h = g.phi_weight();
                let fre = re.dot(&g.trig.t()) * h;
                let fim = im.dot(&g.trig.t()) * h;
                let spec = &self.spectrum;
                let mut out = Vec::with_capacity(spec.total_dim());
                for l in 0..spec.len() {
                    for k in 0..=2 * l {
                        let p = g.legendre.row(lm_index(l, sphere_m(k)));
                        let c = sphere_factor(k);
                        let mut acc = Complex64::new(0.0, 0.0);
                        for i in 0..nt {
                            let wp = g.gl_weights[i] * p[i];
                            acc += Complex64::new(fre[[i, k]], fim[[i, k]]) * wp;
                        }
                        out.push(acc * c);
                    }
                }
                out
            }
        })
    }

    /// Node samples of `Σ c_j^k e_j^k`.
    pub fn synthesize(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        let spec = &self.spectrum;
        if coeffs.len() != spec.total_dim() {
            return Err(Error::LengthMismatch { expected: spec.total_dim(), actual: coeffs.len() });
        }
        Ok(match &self.grid {
            Grid::Dense(g) => {
                let (re, im) = split(coeffs);
                let bt = g.basis.t();
                join(bt.dot(&re).view(), bt.dot(&im).view())
            }
            Grid::Sphere(g) => {
                let nt = g.n_theta();
                let nrows = g.trig.nrows();
                let mut gre = Array2::<f64>::zeros((nt, nrows));
                let mut gim = Array2::<f64>::zeros((nt, nrows));
                for l in 0..spec.len() {
                    for k in 0..=2 * l {
                        let c = coeffs[l * l + k] * sphere_factor(k);
                        let p = g.legendre.row(lm_index(l, sphere_m(k)));
                        for i in 0..nt {
                            gre[[i, k]] += c.re * p[i];
                            gim[[i, k]] += c.im * p[i];
                        }
                    }
                }
                let re = gre.dot(&g.trig);
                let im = gim.dot(&g.trig);
                re.iter().zip(im.iter()).map(|(&a, &b)| Complex64::new(a, b)).collect()
            }
        })
    }

    /// `Σ c_j^k e_j^k(p)`.
    pub fn synthesize_at(&self, coeffs: &[Complex64], p: &Point) -> Result<Complex64> {
        let spec = &self.spectrum;
        if coeffs.len() != spec.total_dim() {
            return Err(Error::LengthMismatch { expected: spec.total_dim(), actual: coeffs.len() });
        }
        Ok(self.basis_at(p)?.iter().zip(coeffs).map(|(&b, c)| c * b).sum())
    }

    /// Full discrete Gram matrix of the retained basis.
    pub fn gram_matrix(&self) -> Array2<f64> {
        match &self.grid {
            Grid::Dense(g) => {
                let w = ArrayView1::from(&g.weights[..]);
                let bw = &g.basis * &w.insert_axis(Axis(0));
                bw.dot(&g.basis.t())
            }
            Grid::Sphere(g) => {
                let (a, phi) = self.sphere_gram_factors(g);
                let spec = &self.spectrum;
                let nb = spec.total_dim();
                let mut out = Array2::zeros((nb, nb));
                for (r, (l, k)) in sphere_indices(spec.len()).enumerate() {
                    for (c, (l2, k2)) in sphere_indices(spec.len()).enumerate() {
                        out[[r, c]] = sphere_factor(k)
                            * sphere_factor(k2)
                            * a[[lm_index(l, sphere_m(k)), lm_index(l2, sphere_m(k2))]]
                            * phi[[k, k2]];
                    }
                }
                out
            }
        }
    }

    fn sphere_gram_factors(&self, g: &SphereGrid) -> (Array2<f64>, Array2<f64>) {
        let w = ArrayView1::from(&g.gl_weights[..]);
        let pw = &g.legendre * &w.insert_axis(Axis(0));
        let a = pw.dot(&g.legendre.t());
        let phi = g.trig.dot(&g.trig.t()) * g.phi_weight();
        (a, phi)
    }

    fn gram_residual(&self) -> f64 {
        match &self.grid {
            Grid::Dense(_) => {
                let g = self.gram_matrix();
                g.indexed_iter()
                    .map(|((r, c), &v)| (v - if r == c { 1.0 } else { 0.0 }).abs())
                    .fold(0.0, f64::max)
            }
            Grid::Sphere(g) => {
                // Pairs sharing a trig row are checked exactly, one azimuthal
                // order at a time; the rest are bounded by Cauchy–Schwarz.
                let j = self.spectrum.len();
                let phi = g.trig.dot(&g.trig.t()) * g.phi_weight();
                let w = ArrayView1::from(&g.gl_weights[..]);
                let mut worst: f64 = 0.0;
                let mut max_diag: f64 = 0.0;
                for m in 0..j {
                    let rows: Vec<usize> = (m..j).map(|l| lm_index(l, m)).collect();
                    let p = g.legendre.select(Axis(0), &rows);
                    let pw = &p * &w.insert_axis(Axis(0));
                    let am = pw.dot(&p.t());
                    let ks: Vec<usize> = if m == 0 { vec![0] } else { vec![2 * m - 1, 2 * m] };
                    for k in ks {
                        let scale = sphere_factor(k).powi(2) * phi[[k, k]];
                        for ((r, c), &v) in am.indexed_iter() {
                            worst = worst.max((scale * v - if r == c { 1.0 } else { 0.0 }).abs());
                        }
                    }
                    max_diag = am.diag().iter().copied().fold(max_diag, f64::max);
                }
                let off_phi = phi
                    .indexed_iter()
                    .filter(|((a, b), _)| a != b)
                    .map(|(_, v)| v.abs())
                    .fold(0.0, f64::max);
                worst.max(2.0 * off_phi * max_diag)
            }
        }
    }

    /// `max_k max_nodes |e_l^k|` for every block.
    pub fn block_sup_norms(&self) -> Vec<f64> {
        let spec = &self.spectrum;
        let off = spec.offsets();
        match &self.grid {
            Grid::Dense(g) => (0..spec.len())
                .map(|l| {
                    g.basis
                        .slice(ndarray::s![off[l]..off[l + 1], ..])
                        .iter()
                        .fold(0.0f64, |m, v| m.max(v.abs()))
                })
                .collect(),
            Grid::Sphere(g) => {
                let trig_max: Vec<f64> =
                    g.trig.rows().into_iter().map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
                (0..spec.len())
                    .map(|l| {
                        (0..=2 * l)
                            .map(|k| {
                                let p = g.legendre.row(lm_index(l, sphere_m(k)));
                                let pm = p.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                                sphere_factor(k) * pm * trig_max[k]
                            })
                            .fold(0.0, f64::max)
                    })
                    .collect()
            }
        }
    }

    /// Symbolic name of every basis function, per block.
    pub fn basis_labels(&self) -> Vec<Vec<String>> {
        let spec = &self.spectrum;
        (0..spec.len())
            .map(|j| match spec.manifold() {
                Manifold::Circle if j == 0 => vec!["1".to_string()],
                Manifold::Circle => vec![format!("cos({j}x)"), format!("sin({j}x)")],
                Manifold::Torus2 if j == 0 => vec!["1".to_string()],
                Manifold::Torus2 => spec
                    .torus_representatives(j)
                    .iter()
                    .flat_map(|(a, b)| [format!("cos({a},{b})"), format!("sin({a},{b})")])
                    .collect(),
                Manifold::Sphere2 => (0..=2 * j)
                    .map(|k| match k {
                        0 => format!("Y({j},0)"),
                        k if k % 2 == 1 => format!("Y({j},c{})", sphere_m(k)),
                        k => format!("Y({j},s{})", sphere_m(k)),
                    })
                    .collect(),
            })
            .collect()
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        let spec = &self.spectrum;
        ModelDescriptor {
            manifold: spec.manifold(),
            j: spec.len(),
            n: spec.dimension(),
            nu: spec.nu(),
            lambdas: spec.lambdas().to_vec(),
            mults: spec.mults().to_vec(),
            quadrature_size: self.quadrature_size,
            orthonormality_residual: self.orthonormality_residual,
            basis_labels: self.basis_labels(),
        }
    }
}

fn sphere_indices(j: usize) -> impl Iterator<Item = (usize, usize)> + Clone {
    (0..j).flat_map(|l| (0..=2 * l).map(move |k| (l, k)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn spec_example_models_build() {
        let c = SpectralModel::build(Manifold::Circle, 4, QuadratureSize::Uniform(64)).unwrap();
        assert_eq!(c.spectrum().lambdas(), &[0.0, 1.0, 4.0, 9.0]);
        let s = SpectralModel::build(Manifold::Sphere2, 3, QuadratureSize::Product([48, 96])).unwrap();
        assert_eq!(s.spectrum().mults(), &[1, 3, 5]);
        let t = SpectralModel::build(Manifold::Torus2, 4, QuadratureSize::Uniform(64)).unwrap();
        assert_eq!(t.spectrum().mults(), &[1, 4, 4, 4]);
        for m in [&c, &s, &t] {
            assert!(m.orthonormality_residual() < 1e-12, "{}", m.orthonormality_residual());
        }
    }

    #[test]
    fn basis_point_values() {
        let c = SpectralModel::build_minimal(Manifold::Circle, 4).unwrap();
        assert!(close(c.eval_basis(0, 0, &Point::Angle(1.3)).unwrap(), 1.0 / (2.0 * PI).sqrt(), 1e-15));
        assert!(close(c.eval_basis(2, 0, &Point::Angle(0.0)).unwrap(), 1.0 / PI.sqrt(), 1e-15));
        let s = SpectralModel::build_minimal(Manifold::Sphere2, 3).unwrap();
        let north = Point::Unit([0.0, 0.0, 1.0]);
        assert!(close(s.eval_basis(1, 0, &north).unwrap(), (3.0 / (4.0 * PI)).sqrt(), 1e-15));
        assert!(c.eval_basis(4, 0, &Point::Angle(0.0)).is_err());
        assert!(c.eval_basis(1, 2, &Point::Angle(0.0)).is_err());
        assert!(s.eval_basis(1, 0, &Point::Angle(0.0)).is_err());
    }

    #[test]
    fn inner_products() {
        let c = SpectralModel::build(Manifold::Circle, 4, QuadratureSize::Uniform(64)).unwrap();
        let e = |j, k| -> Vec<Complex64> {
            c.basis_samples(j, k).unwrap().into_iter().map(|v| Complex64::new(v, 0.0)).collect()
        };
        assert!(close(c.inner_product(&e(1, 0), &e(1, 0)).unwrap().re, 1.0, 1e-14));
        assert!(c.inner_product(&e(1, 0), &e(2, 0)).unwrap().norm() < 1e-14);
        let cosx = c.sample(|p| match p {
            Point::Angle(x) => Complex64::new(x.cos(), 0.0),
            _ => unreachable!(),
        });
        assert!(close(c.inner_product(&cosx, &cosx).unwrap().re, PI, 1e-13));
        assert!(matches!(c.inner_product(&cosx[1..], &cosx), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn underresolved_quadrature_rejected() {
        let err = SpectralModel::build(Manifold::Circle, 8, QuadratureSize::Uniform(10)).unwrap_err();
        assert!(matches!(err, Error::QuadratureUnderresolved { .. }));
        let err = SpectralModel::build(Manifold::Sphere2, 8, QuadratureSize::Product([6, 20])).unwrap_err();
        assert!(matches!(err, Error::QuadratureUnderresolved { .. }));
        assert!(SpectralModel::build(Manifold::Circle, 8, QuadratureSize::Product([20, 20])).is_err());
    }

    #[test]
    fn analyze_inverts_synthesize() {
        for (m, j) in [(Manifold::Circle, 10), (Manifold::Torus2, 12), (Manifold::Sphere2, 9)] {
            let model = SpectralModel::build_minimal(m, j).unwrap();
            let nb = model.spectrum().total_dim();
            let c: Vec<Complex64> =
                (0..nb).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
            let back = model.analyze(&model.synthesize(&c).unwrap()).unwrap();
            let err = back.iter().zip(&c).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err < 1e-12, "{m}: {err}");
        }
    }

    #[test]
    fn sphere_separable_paths_match_pointwise() {
        let model = SpectralModel::build_minimal(Manifold::Sphere2, 6).unwrap();
        let nodes = model.nodes();
        let s = model.basis_samples(4, 5).unwrap();
        for (i, p) in nodes.iter().enumerate().step_by(7) {
            assert!(close(s[i], model.eval_basis(4, 5, p).unwrap(), 1e-13));
        }
        let g = model.gram_matrix();
        let n = g.nrows();
        assert_eq!(n, 36);
        let exact = g.indexed_iter().map(|((r, c), &v)| (v - if r == c { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
        assert!(exact <= model.orthonormality_residual() + 1e-16);
        let coarse = SpectralModel::build_unchecked(Manifold::Sphere2, 6, QuadratureSize::Product([6, 7])).unwrap();
        let gc = coarse.gram_matrix();
        let exact = gc.indexed_iter().map(|((r, c), &v)| (v - if r == c { 1.0 } else { 0.0 }).abs()).fold(0.0, f64::max);
        assert!(exact > 1e-3 && exact <= coarse.orthonormality_residual() + 1e-16);
        for r in 0..n {
            for c in 0..n {
                let want = if r == c { 1.0 } else { 0.0 };
                assert!(close(g[[r, c]], want, 1e-12));
            }
        }
        let coeffs: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, -1.0)).collect();
        let f = model.synthesize(&coeffs).unwrap();
        let at = model.synthesize_at(&coeffs, &nodes[11]).unwrap();
        assert!((f[11] - at).norm() < 1e-11);
    }

    #[test]
    fn descriptor_labels_follow_ordering() {
        let t = SpectralModel::build_minimal(Manifold::Torus2, 3).unwrap();
        let d = t.descriptor();
        assert_eq!(d.basis_labels[1], vec!["cos(0,1)", "sin(0,1)", "cos(1,0)", "sin(1,0)"]);
        let s = SpectralModel::build_minimal(Manifold::Sphere2, 3).unwrap();
        assert_eq!(s.basis_labels()[2], vec!["Y(2,0)", "Y(2,c1)", "Y(2,s1)", "Y(2,c2)", "Y(2,s2)"]);
        let json = serde_json::to_value(&d).unwrap();
        assert_eq!(json["J"], 3);
        assert_eq!(json["quadrature_size"], serde_json::json!([3, 3]));
    }

    #[test]
    fn quadrature_size_serde() {
        let u: QuadratureSize = serde_json::from_str("64").unwrap();
        assert_eq!(u, QuadratureSize::Uniform(64));
        let p: QuadratureSize = serde_json::from_str("[48, 96]").unwrap();
        assert_eq!(p, QuadratureSize::Product([48, 96]));
    }
}
