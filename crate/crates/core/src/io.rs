//! File formats: deterministic JSON, coefficient, sample and tensor files, CSV exports.

use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;
use num_complex::Complex64;
use serde::ser::Serialize;
use serde::Deserialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::coeff::{CoeffArray, DecayEnvelope};
use crate::error::{Error, Result};
use crate::spectral::{Manifold, SpectralModel, Spectrum};
use crate::tensor::TensorRep;
use crate::weights::WeightSequence;

/// Pretty-printed JSON with every float written as `{:.16e}` (17 significant digits).
struct FixedFloat<'a>(PrettyFormatter<'a>);

impl Formatter for FixedFloat<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", fmt_f64(value))
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        write!(w, "{}", fmt_f64(value as f64))
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Enough of a model descriptor to rebuild the spectrum; other fields are ignored.
#[derive(Clone, Debug, PartialEq, Deserialize, serde::Serialize)]
pub struct SpectrumRef {
    pub manifold: Manifold,
    #[serde(rename = "J")]
    pub j: usize,
}

impl SpectrumRef {
    pub fn of(spectrum: &Spectrum) -> Self {
        SpectrumRef { manifold: spectrum.manifold(), j: spectrum.len() }
    }

    pub fn build(&self) -> Result<Arc<Spectrum>> {
        Ok(Arc::new(Spectrum::new(self.manifold, self.j)?))
    }
}

fn pairs(v: &[Complex64]) -> Vec<[f64; 2]> {
    v.iter().map(|z| [z.re, z.im]).collect()
}

fn complexes(v: &[[f64; 2]]) -> Vec<Complex64> {
    v.iter().map(|p| Complex64::new(p[0], p[1])).collect()
}

#[derive(Deserialize, serde::Serialize)]
struct CoeffFile {
    model: SpectrumRef,
    blocks: Vec<Vec<[f64; 2]>>,
}

pub fn write_coeff_file(path: &Path, u: &CoeffArray) -> Result<()> {
    let f = CoeffFile { model: SpectrumRef::of(u.spectrum()), blocks: u.blocks().iter().map(|b| pairs(b)).collect() };
    write_json(path, &f)
}

pub fn read_coeff_file(path: &Path) -> Result<CoeffArray> {
    let f: CoeffFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let blocks = f.blocks.iter().map(|b| complexes(b)).collect();
    CoeffArray::new(f.model.build()?, blocks)
}

#[derive(Deserialize)]
struct SampleFile {
    samples: Vec<[f64; 2]>,
}

/// Node samples `{"samples": [[re, im], ...]}` in the model's node order.
pub fn read_sample_file(path: &Path, model: &SpectralModel) -> Result<Vec<Complex64>> {
    let f: SampleFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if f.samples.len() != model.node_count() {
        return Err(Error::LengthMismatch { expected: model.node_count(), actual: f.samples.len() });
    }
    Ok(complexes(&f.samples))
}

#[derive(serde::Serialize)]
struct TensorFile {
    in_model: SpectrumRef,
    out_model: SpectrumRef,
    #[serde(rename = "K")]
    k: usize,
    #[serde(rename = "J")]
    j: usize,
    /// `blocks[k * J + j]` is `f_{kj}`, each a list of rows.
    blocks: Vec<Vec<Vec<[f64; 2]>>>,
}

fn rows(b: &Array2<Complex64>) -> Vec<Vec<[f64; 2]>> {
    b.rows().into_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect()
}

pub fn write_tensor_file(path: &Path, t: &TensorRep) -> Result<()> {
    let f = TensorFile {
        in_model: SpectrumRef::of(t.in_spectrum()),
        out_model: SpectrumRef::of(t.out_spectrum()),
        k: t.k(),
        j: t.j(),
        blocks: t.blocks().iter().map(rows).collect(),
    };
    write_json(path, &f)
}

fn opt(v: Option<f64>) -> String {
    v.filter(|x| x.is_finite()).map(fmt_f64).unwrap_or_default()
}

/// Columns `l, lambda, lambda^{1/nu}, hs_norm, log_hs_norm, envelope_value` (envelope in log units).
pub fn write_decay_csv(path: &Path, u: &CoeffArray, envelope: Option<&DecayEnvelope>, weight: &WeightSequence) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["l", "lambda", "lambda^{1/nu}", "hs_norm", "log_hs_norm", "envelope_value"])?;
    let s = u.spectrum();
    for l in 0..u.len() {
        let x = s.root(l);
        let env = match envelope {
            Some(e) if l > 0 => e.log_envelope(weight, s.nu(), x)?,
            _ => None,
        };
        w.write_record([
            l.to_string(),
            fmt_f64(s.lambda(l)),
            fmt_f64(x),
            fmt_f64(u.hs_norm(l)),
            opt(Some(u.log_hs_norm(l))),
            opt(env),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `k, j, norm` with the Frobenius norm of every block.
pub fn write_block_norm_csv(path: &Path, t: &TensorRep) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k", "j", "norm"])?;
    for ((k, j), n) in t.block_norms().indexed_iter() {
        w.write_record([k.to_string(), j.to_string(), fmt_f64(*n)])?;
    }
    w.flush()?;
    Ok(())
}
