//! Fourier basis on flat tori.
//!
//! The basis functions are the orthonormal exponentials
//!
//! ```text
//! e_k(x) = Π_i L_i^{-1/2} exp(2πi k_i x_i / L_i) · √μ,   |k_i| ≤ K_i,
//! ```
//!
//! with μ the Lebesgue density, so the L² norm of a half-density is the plain
//! Euclidean norm of its coefficient vector.
//!
//! Coefficients are stored in lexicographic order of `(k_1, …, k_n)`, each
//! component running from `-K_i` to `K_i`, first component slowest. Grid samples
//! use the same row-major layout over node indices `(j_1, …, j_n)` with nodes at
//! `x_i = j_i L_i / M_i`.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::fft_nd;

const PERIOD_RTOL: f64 = 1e-12;

/// Symmetric per-axis truncation `|k_i| ≤ K_i` on a torus with periods `L_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    cutoffs: Vec<usize>,
    periods: Vec<f64>,
}

impl TruncationSpec {
    pub fn new(cutoffs: Vec<usize>, periods: Vec<f64>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::InvalidTruncation("dimension must be at least 1".into()));
        }
        if cutoffs.len() != periods.len() {
            return Err(Error::InvalidTruncation(format!(
                "{} cutoffs but {} periods",
                cutoffs.len(),
                periods.len()
            )));
        }
        if let Some(p) = periods.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidTruncation(format!("period {p} is not positive")));
        }
        Ok(Self { cutoffs, periods })
    }

    /// Same cutoff and period along every axis.
    pub fn uniform(dim: usize, cutoff: usize, period: f64) -> Result<Self> {
        Self::new(vec![cutoff; dim], vec![period; dim])
    }

    pub fn dim(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    /// Modes per axis, `2K_i + 1`.
    pub fn modes(&self, axis: usize) -> usize {
        2 * self.cutoffs[axis] + 1
    }

    /// Basis size `N = Π (2K_i + 1)`.
    pub fn len(&self) -> usize {
        (0..self.dim()).map(|a| self.modes(a)).product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Angular wavenumbers `ω_i = 2π / L_i`.
    pub fn wavenumbers(&self) -> Vec<f64> {
        self.periods.iter().map(|l| 2.0 * PI / l).collect()
    }

    pub(crate) fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.dim()];
        for a in (0..self.dim().saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * self.modes(a + 1);
        }
        strides
    }

    pub fn contains(&self, k: &[i64]) -> bool {
        k.len() == self.dim()
            && k.iter()
                .zip(&self.cutoffs)
                .all(|(&ki, &kc)| ki.unsigned_abs() as usize <= kc)
    }

    /// Position of `k` in the canonical order, or `None` when out of band.
    pub fn flat_index(&self, k: &[i64]) -> Option<usize> {
        if !self.contains(k) {
            return None;
        }
        let mut idx = 0usize;
        for (a, &ki) in k.iter().enumerate() {
            idx = idx * self.modes(a) + (ki + self.cutoffs[a] as i64) as usize;
        }
        Some(idx)
    }

    pub fn multi_index(&self, mut flat: usize) -> MultiIndex {
        let mut k = vec![0i64; self.dim()];
        for a in (0..self.dim()).rev() {
            let m = self.modes(a);
            k[a] = (flat % m) as i64 - self.cutoffs[a] as i64;
            flat /= m;
        }
        MultiIndex(k)
    }

    /// Laplace eigenvalue `λ_k = Σ_i (2π k_i / L_i)²`.
    pub fn eigenvalue(&self, k: &[i64]) -> f64 {
        k.iter()
            .zip(self.wavenumbers())
            .map(|(&ki, w)| (w * ki as f64).powi(2))
            .sum()
    }

    /// Default quadrature grid, `M_i = 4(K_i + 1)`; products of two in-band
    /// fields are integrated exactly on it.
    pub fn default_grid(&self) -> Vec<usize> {
        self.cutoffs.iter().map(|k| 4 * (k + 1)).collect()
    }

    pub(crate) fn same_torus(&self, periods: &[f64]) -> bool {
        periods.len() == self.dim()
            && periods
                .iter()
                .zip(&self.periods)
                .all(|(a, b)| (a - b).abs() <= PERIOD_RTOL * b.abs())
    }

    pub(crate) fn check_torus(&self, periods: &[f64], what: &str) -> Result<()> {
        if self.same_torus(periods) {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "{what}: periods {periods:?} do not match truncation periods {:?}",
                self.periods
            )))
        }
    }

    /// Normalization `Π L_i^{-1/2}` of the basis exponentials.
    pub(crate) fn basis_scale(&self) -> f64 {
        self.periods.iter().map(|l| l.sqrt()).product::<f64>().recip()
    }
}

/// Integer mode label `k = (k_1, …, k_n)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<i64>);

impl MultiIndex {
    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }

    pub fn neg(&self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|k| -k).collect())
    }
}

impl From<Vec<i64>> for MultiIndex {
    fn from(v: Vec<i64>) -> Self {
        MultiIndex(v)
    }
}

/// All multi-indices of the truncation in canonical order.
pub fn index_set(trunc: &TruncationSpec) -> Vec<MultiIndex> {
    (0..trunc.len()).map(|i| trunc.multi_index(i)).collect()
}

/// Coefficients of a half-density (or function) in the orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub trunc: TruncationSpec,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(trunc: TruncationSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != trunc.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for a basis of size {}",
                coeffs.len(),
                trunc.len()
            )));
        }
        Ok(Self { trunc, coeffs })
    }

    pub fn zeros(trunc: TruncationSpec) -> Self {
        let n = trunc.len();
        Self {
            trunc,
            coeffs: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn get(&self, k: &[i64]) -> Option<Complex64> {
        self.trunc.flat_index(k).map(|i| self.coeffs[i])
    }

    pub fn set(&mut self, k: &[i64], value: Complex64) -> Result<()> {
        let i = self
            .trunc
            .flat_index(k)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {k:?} outside truncation")))?;
        self.coeffs[i] = value;
        Ok(())
    }

    /// Euclidean coefficient norm, equal to the L² norm of the field.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max_k |ĉ_{-k} - conj(ĉ_k)|`; zero for real fields.
    pub fn reality_defect(&self) -> f64 {
        // Reversing the canonical order maps k to -k.
        self.coeffs
            .iter()
            .zip(self.coeffs.iter().rev())
            .map(|(c, cm)| (cm - c.conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Re-embeds the coefficients into another truncation on the same torus,
    /// zero-padding or dropping modes as needed.
    pub fn retruncate(&self, trunc: &TruncationSpec) -> Result<SpectralField> {
        trunc.check_torus(self.trunc.periods(), "retruncate")?;
        let mut out = SpectralField::zeros(trunc.clone());
        for (i, c) in self.coeffs.iter().enumerate() {
            let k = self.trunc.multi_index(i);
            if let Some(j) = trunc.flat_index(&k.0) {
                out.coeffs[j] = *c;
            }
        }
        Ok(out)
    }

    pub fn to_record(&self) -> SpectralFieldRecord {
        SpectralFieldRecord {
            cutoffs: self.trunc.cutoffs().to_vec(),
            periods: self.trunc.periods().to_vec(),
            order: ORDER_NOTE.to_string(),
            coefficients: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| CoefficientEntry {
                    k: self.trunc.multi_index(i).0,
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_record(rec: &SpectralFieldRecord) -> Result<Self> {
        let trunc = TruncationSpec::new(rec.cutoffs.clone(), rec.periods.clone())?;
        let mut field = SpectralField::zeros(trunc);
        for e in &rec.coefficients {
            field.set(&e.k, Complex64::new(e.re, e.im))?;
        }
        Ok(field)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Self::from_record(&serde_json::from_str(s)?)
    }

    /// One row per mode: `k1,…,kn,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.trunc.dim()).map(|a| format!("k{a}")).collect();
        header.push("re".into());
        header.push("im".into());
        wtr.write_record(&header)?;
        for (i, c) in self.coeffs.iter().enumerate() {
            let mut row: Vec<String> = self
                .trunc
                .multi_index(i)
                .0
                .iter()
                .map(|k| k.to_string())
                .collect();
            row.push(fmt_f64(c.re));
            row.push(fmt_f64(c.im));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

const ORDER_NOTE: &str = "lexicographic in (k1..kn), each from -K to K, first index slowest";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub k: Vec<i64>,
    pub re: f64,
    pub im: f64,
}

/// JSON form of a [`SpectralField`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralFieldRecord {
    pub cutoffs: Vec<usize>,
    pub periods: Vec<f64>,
    #[serde(default)]
    pub order: String,
    pub coefficients: Vec<CoefficientEntry>,
}

/// Samples on the uniform grid `x_j = (j_i L_i / M_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub periods: Vec<f64>,
    pub sizes: Vec<usize>,
    pub samples: Vec<Complex64>,
}

impl GridField {
    pub fn new(periods: Vec<f64>, sizes: Vec<usize>, samples: Vec<Complex64>) -> Result<Self> {
        if periods.len() != sizes.len() || sizes.is_empty() {
            return Err(Error::DimensionMismatch(format!(
                "{} periods for {} grid axes",
                periods.len(),
                sizes.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::InvalidArgument("grid axis with zero nodes".into()));
        }
        if let Some(p) = periods.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return Err(Error::InvalidArgument(format!("period {p} is not positive")));
        }
        let n: usize = sizes.iter().product();
        if samples.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                n
            )));
        }
        Ok(Self {
            periods,
            sizes,
            samples,
        })
    }

    /// Samples `f` at every node.
    pub fn from_fn(
        periods: Vec<f64>,
        sizes: Vec<usize>,
        mut f: impl FnMut(&[f64]) -> Complex64,
    ) -> Result<Self> {
        let n: usize = sizes.iter().product();
        let mut samples = Vec::with_capacity(n);
        let mut x = vec![0.0; sizes.len()];
        for flat in 0..n {
            node_coords(&periods, &sizes, flat, &mut x);
            samples.push(f(&x));
        }
        Self::new(periods, sizes, samples)
    }

    pub fn from_real_fn(
        periods: Vec<f64>,
        sizes: Vec<usize>,
        mut f: impl FnMut(&[f64]) -> f64,
    ) -> Result<Self> {
        Self::from_fn(periods, sizes, |x| Complex64::new(f(x), 0.0))
    }

    pub fn dim(&self) -> usize {
        self.sizes.len()
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Trapezoid weight `Π L_i / M_i` shared by every node.
    pub fn cell_measure(&self) -> f64 {
        self.periods
            .iter()
            .zip(&self.sizes)
            .map(|(l, &m)| l / m as f64)
            .product()
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        node_coords(&self.periods, &self.sizes, flat, &mut x);
        x
    }

    /// Flat index of the node with per-axis indices `j`.
    pub fn flat_index(&self, j: &[usize]) -> usize {
        j.iter()
            .zip(&self.sizes)
            .fold(0, |acc, (&ji, &m)| acc * m + ji)
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.re).collect()
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> GridField {
        GridField {
            periods: self.periods.clone(),
            sizes: self.sizes.clone(),
            samples: self.samples.iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let g: GridField = serde_json::from_str(s)?;
        Self::new(g.periods, g.sizes, g.samples)
    }

    /// One row per node: `x1,…,xn,re,im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim()).map(|a| format!("x{a}")).collect();
        header.push("re".into());
        header.push("im".into());
        wtr.write_record(&header)?;
        let mut x = vec![0.0; self.dim()];
        for (flat, c) in self.samples.iter().enumerate() {
            node_coords(&self.periods, &self.sizes, flat, &mut x);
            let mut row: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
            row.push(fmt_f64(c.re));
            row.push(fmt_f64(c.im));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads the CSV layout written by [`GridField::write_csv`]. Rows must be
    /// in canonical node order; the `im` column is optional. Grid sizes are
    /// inferred from the number of distinct coordinates per axis.
    pub fn read_csv<R: Read>(r: R, periods: Vec<f64>) -> Result<Self> {
        let dim = periods.len();
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        let has_im = headers.iter().any(|h| h.trim() == "im");
        let mut coords: Vec<Vec<f64>> = vec![Vec::new(); dim];
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::InvalidArgument(format!("missing column {i}")))?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidArgument(format!("bad number: {e}")))
            };
            for (a, c) in coords.iter_mut().enumerate() {
                c.push(parse(a)?);
            }
            let re = parse(dim)?;
            let im = if has_im { parse(dim + 1)? } else { 0.0 };
            samples.push(Complex64::new(re, im));
        }
        let sizes = coords
            .iter()
            .map(|c| {
                let mut v = c.clone();
                v.sort_by(f64::total_cmp);
                v.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
                v.len()
            })
            .collect();
        Self::new(periods, sizes, samples)
    }
}

fn node_coords(periods: &[f64], sizes: &[usize], mut flat: usize, x: &mut [f64]) {
    for a in (0..sizes.len()).rev() {
        let j = flat % sizes[a];
        flat /= sizes[a];
        x[a] = j as f64 * periods[a] / sizes[a] as f64;
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    // Shortest round-trip representation.
    format!("{v:?}")
}

fn check_grid(trunc: &TruncationSpec, sizes: &[usize]) -> Result<()> {
    if sizes.len() != trunc.dim() {
        return Err(Error::DimensionMismatch(format!(
            "grid has {} axes, truncation {}",
            sizes.len(),
            trunc.dim()
        )));
    }
    for (axis, (&m, _)) in sizes.iter().zip(trunc.cutoffs()).enumerate() {
        let required = trunc.modes(axis);
        if m < required {
            return Err(Error::GridTooCoarse {
                axis,
                size: m,
                required,
            });
        }
    }
    Ok(())
}

/// Trapezoid-rule projection of grid samples onto the truncated basis,
/// `ĉ_k = (Π L_i/M_i) Σ_j conj(e_k(x_j)) ψ(x_j)`.
pub fn analyze(field: &GridField, trunc: &TruncationSpec) -> Result<SpectralField> {
    trunc.check_torus(&field.periods, "analyze")?;
    check_grid(trunc, &field.sizes)?;
    let mut buf = field.samples.clone();
    fft_nd(&mut buf, &field.sizes, FftDirection::Forward);
    let scale = field.cell_measure() * trunc.basis_scale();
    let mut out = SpectralField::zeros(trunc.clone());
    let mut j = vec![0usize; trunc.dim()];
    for (i, c) in out.coeffs.iter_mut().enumerate() {
        let k = trunc.multi_index(i);
        for (a, &ka) in k.0.iter().enumerate() {
            j[a] = ka.rem_euclid(field.sizes[a] as i64) as usize;
        }
        *c = buf[field.flat_index(&j)] * scale;
    }
    Ok(out)
}

/// Evaluates the truncated series at the nodes of an `sizes` grid.
pub fn synthesize(spec: &SpectralField, sizes: &[usize]) -> Result<GridField> {
    let trunc = &spec.trunc;
    check_grid(trunc, sizes)?;
    let n: usize = sizes.iter().product();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut j = vec![0usize; trunc.dim()];
    for (i, c) in spec.coeffs.iter().enumerate() {
        let k = trunc.multi_index(i);
        let mut flat = 0usize;
        for (a, &ka) in k.0.iter().enumerate() {
            j[a] = ka.rem_euclid(sizes[a] as i64) as usize;
            flat = flat * sizes[a] + j[a];
        }
        buf[flat] = *c;
    }
    fft_nd(&mut buf, sizes, FftDirection::Inverse);
    let scale = trunc.basis_scale();
    for v in buf.iter_mut() {
        *v *= scale;
    }
    GridField::new(trunc.periods().to_vec(), sizes.to_vec(), buf)
}

/// `(Σ_k (1 + λ_k)^s |ĉ_k|²)^{1/2}`.
pub fn sobolev_norm(spec: &SpectralField, s: f64) -> Result<f64> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("Sobolev order {s} must be >= 0")));
    }
    let sum: f64 = spec
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let k = spec.trunc.multi_index(i);
            (1.0 + spec.trunc.eigenvalue(&k.0)).powf(s) * c.norm_sqr()
        })
        .sum();
    Ok(sum.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn index_set_small_cases() {
        let t = TruncationSpec::uniform(1, 1, 1.0).unwrap();
        let ks: Vec<Vec<i64>> = index_set(&t).into_iter().map(|k| k.0).collect();
        assert_eq!(ks, vec![vec![-1], vec![0], vec![1]]);
        let t2 = TruncationSpec::uniform(2, 1, 1.0).unwrap();
        let ks2 = index_set(&t2);
        assert_eq!(ks2.len(), 9);
        assert_eq!(ks2[0].0, vec![-1, -1]);
        assert_eq!(ks2[1].0, vec![-1, 0]);
        assert_eq!(ks2[8].0, vec![1, 1]);
        let t3 = TruncationSpec::uniform(3, 16, 1.0).unwrap();
        assert_eq!(index_set(&t3).len(), 35937);
    }

    #[test]
    fn flat_index_roundtrip() {
        let t = TruncationSpec::new(vec![2, 0, 3], vec![1.0, 2.0, 3.0]).unwrap();
        for i in 0..t.len() {
            let k = t.multi_index(i);
            assert_eq!(t.flat_index(&k.0), Some(i));
        }
        assert_eq!(t.flat_index(&[3, 0, 0]), None);
    }

    #[test]
    fn rejects_bad_truncations() {
        assert!(TruncationSpec::new(vec![], vec![]).is_err());
        assert!(TruncationSpec::new(vec![1], vec![0.0]).is_err());
        assert!(TruncationSpec::new(vec![1, 2], vec![1.0]).is_err());
    }

    #[test]
    fn constant_field_lands_in_zero_mode() {
        let l = 2.0 * PI;
        let t = TruncationSpec::uniform(1, 4, l).unwrap();
        let g = GridField::from_real_fn(vec![l], vec![20], |_| 3.0).unwrap();
        let s = analyze(&g, &t).unwrap();
        for (i, v) in s.coeffs.iter().enumerate() {
            let expect = if i == 4 { 3.0 * l.sqrt() } else { 0.0 };
            assert!((v - c(expect, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn single_exponential_mode() {
        let l = 1.7;
        let t = TruncationSpec::uniform(1, 3, l).unwrap();
        let g = GridField::from_fn(vec![l], vec![7], |x| {
            Complex64::from_polar(1.0, 2.0 * PI * x[0] / l)
        })
        .unwrap();
        let s = analyze(&g, &t).unwrap();
        assert!((s.get(&[1]).unwrap() - c(l.sqrt(), 0.0)).norm() < 1e-13);
        let others: f64 = s.coeffs.iter().map(|v| v.norm()).sum::<f64>() - l.sqrt();
        assert!(others.abs() < 1e-12);
    }

    #[test]
    fn grid_too_coarse_is_rejected() {
        let t = TruncationSpec::uniform(1, 4, 1.0).unwrap();
        let g = GridField::from_real_fn(vec![1.0], vec![8], |_| 1.0).unwrap();
        assert!(matches!(analyze(&g, &t), Err(Error::GridTooCoarse { .. })));
        let s = SpectralField::zeros(t);
        assert!(matches!(synthesize(&s, &[8]), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn synthesize_constant_and_zero() {
        let l = 2.0 * PI;
        let t = TruncationSpec::uniform(1, 5, l).unwrap();
        let mut s = SpectralField::zeros(t.clone());
        let g = synthesize(&s, &[16]).unwrap();
        assert!(g.samples.iter().all(|v| v.norm() == 0.0));
        s.set(&[0], c(l.sqrt(), 0.0)).unwrap();
        let g = synthesize(&s, &[16]).unwrap();
        assert!(g.samples.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-14));
    }

    #[test]
    fn smooth_half_density_roundtrip() {
        // ψ = (e³ sin² x + e⁻³ cos² x)^{-1/2} compared against its closed form.
        let l = 2.0 * PI;
        let psi = |x: f64| {
            (3f64.exp() * x.sin().powi(2) + (-3f64).exp() * x.cos().powi(2)).powf(-0.5)
        };
        let t = TruncationSpec::uniform(1, 16, l).unwrap();
        let g = GridField::from_real_fn(vec![l], vec![128], |x| psi(x[0])).unwrap();
        let s = analyze(&g, &t).unwrap();
        let back = synthesize(&s, &[128]).unwrap();
        // Round trip reproduces the band-limited part exactly at the nodes:
        // re-analysing gives the same coefficients.
        let again = analyze(&back, &t).unwrap();
        let err = s
            .coeffs
            .iter()
            .zip(&again.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12);
        // Pointwise: the node values of the truncated series stay within the
        // tail mass of the closed form.
        let tail: f64 = {
            let fine = TruncationSpec::uniform(1, 60, l).unwrap();
            let gf = GridField::from_real_fn(vec![l], vec![512], |x| psi(x[0])).unwrap();
            let sf = analyze(&gf, &fine).unwrap();
            sf.coeffs
                .iter()
                .enumerate()
                .filter(|(i, _)| (*i as i64 - 60).abs() > 16)
                .map(|(_, v)| v.norm())
                .sum::<f64>()
                / l.sqrt()
        };
        let max_err = back
            .samples
            .iter()
            .enumerate()
            .map(|(j, v)| (v.re - psi(back.node(j)[0])).abs())
            .fold(0.0, f64::max);
        assert!(max_err <= 2.0 * tail + 1e-10, "{max_err} vs tail {tail}");
    }

    #[test]
    fn sobolev_examples() {
        let l = 2.0 * PI;
        let t = TruncationSpec::uniform(1, 2, l).unwrap();
        let mut s = SpectralField::zeros(t);
        s.set(&[1], c(1.0, 0.0)).unwrap();
        assert!((sobolev_norm(&s, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-14);
        s.set(&[-2], c(0.3, -0.4)).unwrap();
        assert!((sobolev_norm(&s, 0.0).unwrap() - s.norm()).abs() < 1e-15);
        assert!(sobolev_norm(&s, -1.0).is_err());
    }

    #[test]
    fn sobolev_tail_decays_with_cutoff() {
        let l = 2.0 * PI;
        let big = TruncationSpec::uniform(1, 64, l).unwrap();
        let g = GridField::from_real_fn(vec![l], vec![512], |x| {
            (1.5 + x[0].cos()).recip()
        })
        .unwrap();
        let full = analyze(&g, &big).unwrap();
        let mut prev = f64::INFINITY;
        for k in [2usize, 4, 8, 16, 32] {
            let mut tail = full.clone();
            for (i, v) in tail.coeffs.iter_mut().enumerate() {
                if big.multi_index(i).0[0].unsigned_abs() as usize <= k {
                    *v = c(0.0, 0.0);
                }
            }
            let n = sobolev_norm(&tail, 1.0).unwrap();
            assert!(n < prev);
            prev = n;
        }
    }

    #[test]
    fn json_and_csv_serialization() {
        let t = TruncationSpec::new(vec![1, 2], vec![1.0, 2.0]).unwrap();
        let mut s = SpectralField::zeros(t);
        s.set(&[1, -2], c(0.25, -1.5)).unwrap();
        let back = SpectralField::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k1,k2,re,im\n-1,-2,0.0,0.0\n"));
        assert_eq!(text.lines().count(), 1 + 15);

        let g = GridField::from_real_fn(vec![1.0, 2.0], vec![3, 4], |x| x[0] + 10.0 * x[1]).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let read = GridField::read_csv(&buf[..], vec![1.0, 2.0]).unwrap();
        assert_eq!(read, g);
        assert_eq!(GridField::from_json(&g.to_json().unwrap()).unwrap(), g);
    }

    fn arb_field() -> impl Strategy<Value = SpectralField> {
        (1usize..=2, 0usize..=4, 0.5f64..7.0).prop_flat_map(|(dim, k, l)| {
            let t = TruncationSpec::uniform(dim, k, l).unwrap();
            let n = t.len();
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n).prop_map(move |v| {
                SpectralField::new(t.clone(), v.into_iter().map(|(a, b)| c(a, b)).collect())
                    .unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn analyze_inverts_synthesize(s in arb_field()) {
            let sizes: Vec<usize> = s.trunc.cutoffs().iter().map(|k| 2 * k + 1).collect();
            let back = analyze(&synthesize(&s, &sizes).unwrap(), &s.trunc).unwrap();
            let err = s.coeffs.iter().zip(&back.coeffs).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            prop_assert!(err <= 1e-12);
        }

        #[test]
        fn parseval_on_doubled_grid(s in arb_field()) {
            let sizes: Vec<usize> = s.trunc.cutoffs().iter().map(|k| 2 * (2 * k + 1)).collect();
            let g = synthesize(&s, &sizes).unwrap();
            let quad: f64 = g.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_measure();
            let exact: f64 = s.coeffs.iter().map(|v| v.norm_sqr()).sum();
            prop_assert!((quad - exact).abs() <= 1e-12 * exact.max(1.0));
        }

        #[test]
        fn real_samples_give_conjugate_symmetric_coefficients(
            vals in proptest::collection::vec(-2.0f64..2.0, 30)
        ) {
            let g = GridField::new(
                vec![1.3, 2.0],
                vec![5, 6],
                vals.iter().map(|&v| c(v, 0.0)).collect(),
            ).unwrap();
            let t = TruncationSpec::new(vec![2, 2], vec![1.3, 2.0]).unwrap();
            prop_assert!(analyze(&g, &t).unwrap().reality_defect() <= 1e-13);
        }
    }
}
