//! Orthonormal associated Legendre functions.
//!
//! `p(l, m)` is normalized so that `p(l, m)(cos θ) · trig(mφ)` has unit `L²`
//! norm on the unit sphere, with `trig = 1` for `m = 0` and `√2 cos`, `√2 sin`
//! otherwise. No Condon–Shortley phase.

use std::f64::consts::PI;

#[inline]
pub fn lm_index(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

/// All `p(l, m)(x)` for `0 ≤ m ≤ l < degree`, stored at [`lm_index`].
pub fn normalized_table(degree: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; degree * (degree + 1) / 2];
    if degree == 0 {
        return out;
    }
    let s = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = (1.0 / (4.0 * PI)).sqrt();
    for m in 0..degree {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * s;
        }
        out[lm_index(m, m)] = pmm;
        if m + 1 < degree {
            let pm1 = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
            out[lm_index(m + 1, m)] = pm1;
            let (mut p2, mut p1) = (pmm, pm1);
            for l in m + 2..degree {
                let lf = l as f64;
                let mf = m as f64;
                let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
                let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
                let p = a * (x * p1 - b * p2);
                out[lm_index(l, m)] = p;
                p2 = p1;
                p1 = p;
            }
        }
    }
    out
}
