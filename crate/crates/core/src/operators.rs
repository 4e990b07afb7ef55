//! Galerkin generators and multiplication operators in the Fourier basis.
//!
//! A real vector field with finitely many Fourier terms couples each mode `m`
//! only to the modes `m + p` for the wavevectors `p` it contains, so every
//! generator here is stored as a set of bands (one per offset `p`), each a
//! diagonal indexed by the source mode. Targets that fall outside the
//! truncation are dropped, which is the principal-submatrix restriction
//! `π_N ∘ L |_{V_N}`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{fmt_f64, MultiIndex, SpectralField, TruncationSpec};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const REALITY_TOL: f64 = 1e-13;

/// A real vector field given by the plain Fourier coefficients of each
/// component, `X^i(x) = Σ_p c^i_p exp(2πi Σ_j p_j x_j / L_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorFieldSpec {
    periods: Vec<f64>,
    components: Vec<BTreeMap<MultiIndex, Complex64>>,
}

impl VectorFieldSpec {
    pub fn zero(periods: Vec<f64>) -> Self {
        let dim = periods.len();
        Self {
            periods,
            components: vec![BTreeMap::new(); dim],
        }
    }

    /// Builds a field from raw coefficients; rejects non-real fields.
    pub fn from_coefficients(
        periods: Vec<f64>,
        components: Vec<BTreeMap<MultiIndex, Complex64>>,
    ) -> Result<Self> {
        if periods.len() != components.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} periods for {} components",
                periods.len(),
                components.len()
            )));
        }
        for comp in &components {
            if let Some(p) = comp.keys().find(|p| p.0.len() != periods.len()) {
                return Err(Error::DimensionMismatch(format!(
                    "wavevector {:?} in a {}-dimensional field",
                    p.0,
                    periods.len()
                )));
            }
        }
        let vf = Self {
            periods,
            components,
        };
        vf.check_real()?;
        Ok(vf)
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn components(&self) -> &[BTreeMap<MultiIndex, Complex64>] {
        &self.components
    }

    fn add(&mut self, component: usize, p: Vec<i64>, value: Complex64) {
        let e = self.components[component].entry(MultiIndex(p)).or_insert(ZERO);
        *e += value;
    }

    fn check_wavevector(&self, component: usize, p: &[i64]) {
        assert!(component < self.dim(), "component {component} out of range");
        assert_eq!(p.len(), self.dim(), "wavevector dimension");
    }

    /// Adds `amplitude · sin(2π p·x / L)` to component `i`.
    pub fn with_sin(mut self, component: usize, p: &[i64], amplitude: f64) -> Self {
        self.check_wavevector(component, p);
        // sin θ = (e^{iθ} - e^{-iθ}) / 2i
        let half = Complex64::new(0.0, -0.5 * amplitude);
        let neg: Vec<i64> = p.iter().map(|k| -k).collect();
        self.add(component, p.to_vec(), half);
        self.add(component, neg, -half);
        self
    }

    /// Adds `amplitude · cos(2π p·x / L)` to component `i`.
    pub fn with_cos(mut self, component: usize, p: &[i64], amplitude: f64) -> Self {
        self.check_wavevector(component, p);
        let half = Complex64::new(0.5 * amplitude, 0.0);
        let neg: Vec<i64> = p.iter().map(|k| -k).collect();
        self.add(component, p.to_vec(), half);
        self.add(component, neg, half);
        self
    }

    pub fn with_constant(mut self, component: usize, value: f64) -> Self {
        let zero = vec![0i64; self.dim()];
        self.check_wavevector(component, &zero);
        self.add(component, zero, Complex64::new(value, 0.0));
        self
    }

    /// Largest number of stored coefficients over the components.
    pub fn max_terms(&self) -> usize {
        self.components.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    fn check_real(&self) -> Result<()> {
        for comp in &self.components {
            let scale = comp.values().map(|v| v.norm()).fold(1.0, f64::max);
            for (p, c) in comp {
                let partner = comp.get(&p.neg()).copied().unwrap_or(ZERO);
                if (partner - c.conj()).norm() > REALITY_TOL * scale {
                    return Err(Error::NonRealField { index: p.0.clone() });
                }
            }
        }
        Ok(())
    }

    /// Evaluates the field at `x`, writing the components into `out`.
    pub fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        let omega: Vec<f64> = self.periods.iter().map(|l| 2.0 * PI / l).collect();
        for (comp, o) in self.components.iter().zip(out.iter_mut()) {
            *o = comp
                .iter()
                .map(|(p, c)| {
                    let phase: f64 = p.0.iter().zip(x).zip(&omega).map(|((&k, &xi), w)| w * k as f64 * xi).sum();
                    (c * Complex64::from_polar(1.0, phase)).re
                })
                .sum();
        }
    }

    /// Pointwise evaluator that merges `±p` pairs and shares one `sin_cos`
    /// per distinct wavevector across components.
    pub fn evaluator(&self) -> FieldEvaluator {
        let dim = self.dim();
        let omega: Vec<f64> = self.periods.iter().map(|l| 2.0 * PI / l).collect();
        let mut waves: BTreeMap<MultiIndex, usize> = BTreeMap::new();
        let mut constants = vec![0.0; dim];
        // (wave, component) -> (cos coefficient, sin coefficient)
        let mut acc: BTreeMap<(usize, usize), (f64, f64)> = BTreeMap::new();
        for (i, comp) in self.components.iter().enumerate() {
            for (p, c) in comp {
                if p.0.iter().all(|&k| k == 0) {
                    constants[i] += c.re;
                    continue;
                }
                let positive = p.0.iter().find(|&&k| k != 0).is_some_and(|&k| k > 0);
                let key = if positive { p.clone() } else { p.neg() };
                let next = waves.len();
                let w = *waves.entry(key).or_insert(next);
                let e = acc.entry((w, i)).or_insert((0.0, 0.0));
                // Re(c e^{±iθ}) = Re c cos θ ∓ Im c sin θ
                e.0 += c.re;
                e.1 += if positive { -c.im } else { c.im };
            }
        }
        let mut wave_list = vec![Vec::new(); waves.len()];
        for (p, w) in waves {
            wave_list[w] = p.0.iter().zip(&omega).map(|(&k, w)| k as f64 * w).collect();
        }
        let mut terms = vec![Vec::new(); dim];
        for ((w, i), (a, b)) in acc {
            terms[i].push((w, a, b));
        }
        FieldEvaluator {
            waves: wave_list,
            terms,
            constants,
        }
    }

    /// Divergence coefficients `Σ_i i ω_i p_i c^i_p`; all zero for
    /// volume-preserving fields.
    pub fn divergence(&self) -> BTreeMap<MultiIndex, Complex64> {
        let mut out: BTreeMap<MultiIndex, Complex64> = BTreeMap::new();
        for (i, comp) in self.components.iter().enumerate() {
            let w = 2.0 * PI / self.periods[i];
            for (p, c) in comp {
                *out.entry(p.clone()).or_insert(ZERO) += Complex64::new(0.0, w * p.0[i] as f64) * c;
            }
        }
        out
    }

    fn check_against(&self, trunc: &TruncationSpec) -> Result<()> {
        if self.dim() != trunc.dim() {
            return Err(Error::DimensionMismatch(format!(
                "vector field is {}-dimensional, truncation {}",
                self.dim(),
                trunc.dim()
            )));
        }
        trunc.check_torus(&self.periods, "vector field")?;
        self.check_real()
    }
}

/// Compiled form of a [`VectorFieldSpec`] for repeated evaluation, e.g.
/// along particle paths.
#[derive(Debug, Clone)]
pub struct FieldEvaluator {
    waves: Vec<Vec<f64>>,
    terms: Vec<Vec<(usize, f64, f64)>>,
    constants: Vec<f64>,
}

impl FieldEvaluator {
    pub fn evaluate(&self, x: &[f64], out: &mut [f64]) {
        let mut sc = [(0.0, 0.0); 16];
        let mut heap = Vec::new();
        let sc: &mut [(f64, f64)] = if self.waves.len() <= sc.len() {
            &mut sc[..self.waves.len()]
        } else {
            heap.resize(self.waves.len(), (0.0, 0.0));
            &mut heap
        };
        for (slot, w) in sc.iter_mut().zip(&self.waves) {
            let theta: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
            *slot = theta.sin_cos();
        }
        for ((o, terms), c0) in out.iter_mut().zip(&self.terms).zip(&self.constants) {
            *o = terms.iter().fold(*c0, |acc, &(w, a, b)| acc + a * sc[w].1 + b * sc[w].0);
        }
    }
}

/// Which equation a banded generator discretizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    /// The Lie derivative `X_N` of half-densities (anti-Hermitian). The
    /// evolution is `ż = -X_N z`.
    HalfDensity,
    /// Standard Galerkin right-hand side of the continuity equation, `ρ̇ = G ρ`.
    Density,
    /// Standard Galerkin right-hand side of the transport equation, `ḟ = T f`.
    Transport,
}

#[derive(Debug, Clone, PartialEq)]
struct Band {
    offset: MultiIndex,
    /// Entry `(m + offset, m)` for each source mode `m`; zero when the target
    /// is out of band.
    entries: Vec<Complex64>,
    /// Flat target index per source, `usize::MAX` when dropped.
    targets: Vec<usize>,
}

/// Banded matrix on `V_N`, stored as one diagonal per mode offset.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseBandedOperator {
    trunc: TruncationSpec,
    kind: GeneratorKind,
    bands: Vec<Band>,
}

impl SparseBandedOperator {
    fn zero(trunc: TruncationSpec, kind: GeneratorKind) -> Self {
        Self {
            trunc,
            kind,
            bands: Vec::new(),
        }
    }

    /// Builds a banded operator whose entry `(m+δ, m)` is `entry(δ, m)`.
    fn from_offsets(
        trunc: &TruncationSpec,
        kind: GeneratorKind,
        offsets: impl IntoIterator<Item = MultiIndex>,
        entry: impl Fn(&[i64], &[i64]) -> Complex64,
    ) -> Self {
        let n = trunc.len();
        let strides = trunc.strides();
        let mut bands = Vec::new();
        for offset in offsets {
            let shift: i64 = offset
                .0
                .iter()
                .zip(&strides)
                .map(|(d, &s)| d * s as i64)
                .sum();
            let mut entries = vec![ZERO; n];
            let mut targets = vec![usize::MAX; n];
            let mut target = vec![0i64; trunc.dim()];
            for src in 0..n {
                let m = trunc.multi_index(src);
                for (t, (mi, di)) in target.iter_mut().zip(m.0.iter().zip(&offset.0)) {
                    *t = mi + di;
                }
                if trunc.contains(&target) {
                    entries[src] = entry(&offset.0, &m.0);
                    targets[src] = (src as i64 + shift) as usize;
                }
            }
            bands.push(Band {
                offset,
                entries,
                targets,
            });
        }
        Self {
            trunc: trunc.clone(),
            kind,
            bands,
        }
    }

    pub fn trunc(&self) -> &TruncationSpec {
        &self.trunc
    }

    pub fn kind(&self) -> GeneratorKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.trunc.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bands.is_empty()
    }

    pub fn offsets(&self) -> Vec<MultiIndex> {
        self.bands.iter().map(|b| b.offset.clone()).collect()
    }

    /// Number of structurally nonzero entries.
    pub fn stored_entries(&self) -> usize {
        self.bands
            .iter()
            .map(|b| b.targets.iter().filter(|&&t| t != usize::MAX).count())
            .sum()
    }

    /// Entry `(row, col)` of the matrix in canonical order.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.bands
            .iter()
            .filter(|b| b.targets[col] == row)
            .map(|b| b.entries[col])
            .sum()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; x.len()];
        self.apply_into(x, &mut y, 1.0);
        y
    }

    /// `y += scale · A x`.
    pub fn apply_into(&self, x: &[Complex64], y: &mut [Complex64], scale: f64) {
        assert_eq!(x.len(), self.len());
        for band in &self.bands {
            for ((src, e), &t) in band.entries.iter().enumerate().zip(&band.targets) {
                if t != usize::MAX {
                    y[t] += e * x[src] * scale;
                }
            }
        }
    }

    /// `y += scale · A† x`.
    pub fn apply_adjoint_into(&self, x: &[Complex64], y: &mut [Complex64], scale: f64) {
        assert_eq!(x.len(), self.len());
        for band in &self.bands {
            for ((src, e), &t) in band.entries.iter().enumerate().zip(&band.targets) {
                if t != usize::MAX {
                    y[src] += e.conj() * x[t] * scale;
                }
            }
        }
    }

    /// `y = G x` for the time-evolution generator (`-X_N` for half-densities).
    pub fn apply_generator(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![ZERO; x.len()];
        self.apply_generator_into(x, &mut y, 1.0);
        y
    }

    pub(crate) fn apply_generator_into(&self, x: &[Complex64], y: &mut [Complex64], scale: f64) {
        let s = if self.kind == GeneratorKind::HalfDensity { -scale } else { scale };
        self.apply_into(x, y, s);
    }

    pub(crate) fn apply_generator_adjoint_into(
        &self,
        x: &[Complex64],
        y: &mut [Complex64],
        scale: f64,
    ) {
        let s = if self.kind == GeneratorKind::HalfDensity { -scale } else { scale };
        self.apply_adjoint_into(x, y, s);
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let n = self.len();
        let mut m = DMatrix::from_element(n, n, ZERO);
        for band in &self.bands {
            for ((src, e), &t) in band.entries.iter().enumerate().zip(&band.targets) {
                if t != usize::MAX {
                    m[(t, src)] += *e;
                }
            }
        }
        m
    }

    /// Dense matrix of the evolution generator `G`.
    pub fn generator_dense(&self) -> DMatrix<Complex64> {
        let m = self.to_dense();
        if self.kind == GeneratorKind::HalfDensity {
            -m
        } else {
            m
        }
    }

    /// Max-abs entry of `A + B·scale` over the union of both sparsity patterns.
    pub fn max_entry_difference(&self, other: &SparseBandedOperator, scale: f64) -> Result<f64> {
        if self.trunc != other.trunc {
            return Err(Error::DimensionMismatch("operators on different truncations".into()));
        }
        let mut acc: BTreeMap<(usize, usize), Complex64> = BTreeMap::new();
        for (op, s) in [(self, 1.0), (other, scale)] {
            for band in &op.bands {
                for ((src, e), &t) in band.entries.iter().enumerate().zip(&band.targets) {
                    if t != usize::MAX {
                        *acc.entry((t, src)).or_insert(ZERO) += e * s;
                    }
                }
            }
        }
        Ok(acc.values().map(|v| v.norm()).fold(0.0, f64::max))
    }

    pub fn to_record(&self) -> BandedOperatorRecord {
        BandedOperatorRecord {
            kind: self.kind,
            cutoffs: self.trunc.cutoffs().to_vec(),
            periods: self.trunc.periods().to_vec(),
            bands: self
                .bands
                .iter()
                .map(|b| BandRecord {
                    offset: b.offset.0.clone(),
                    re: b.entries.iter().map(|e| e.re).collect(),
                    im: b.entries.iter().map(|e| e.im).collect(),
                })
                .collect(),
        }
    }

    /// JSON band list: one diagonal per offset, indexed by source mode.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_record())?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let rec: BandedOperatorRecord = serde_json::from_str(s)?;
        let trunc = TruncationSpec::new(rec.cutoffs, rec.periods)?;
        let n = trunc.len();
        let mut lookup = BTreeMap::new();
        for b in &rec.bands {
            if b.re.len() != n || b.im.len() != n || b.offset.len() != trunc.dim() {
                return Err(Error::DimensionMismatch("band length does not match basis".into()));
            }
            lookup.insert(MultiIndex(b.offset.clone()), b);
        }
        let offsets: Vec<MultiIndex> = lookup.keys().cloned().collect();
        let strides = trunc.strides();
        Ok(Self::from_offsets(&trunc, rec.kind, offsets, |d, m| {
            let b = lookup[&MultiIndex(d.to_vec())];
            let src: usize = m
                .iter()
                .zip(trunc.cutoffs())
                .zip(&strides)
                .map(|((mi, &k), &s)| (mi + k as i64) as usize * s)
                .sum();
            Complex64::new(b.re[src], b.im[src])
        }))
    }

    /// Matrix-market style coordinate dump (1-based indices).
    pub fn write_matrix_market<W: Write>(&self, mut w: W) -> Result<()> {
        let mut body = String::new();
        let mut count = 0usize;
        for band in &self.bands {
            for ((src, e), &t) in band.entries.iter().enumerate().zip(&band.targets) {
                if t != usize::MAX {
                    count += 1;
                    let _ = writeln!(body, "{} {} {} {}", t + 1, src + 1, fmt_f64(e.re), fmt_f64(e.im));
                }
            }
        }
        writeln!(w, "%%MatrixMarket matrix coordinate complex general")?;
        writeln!(w, "% kind: {:?}", self.kind)?;
        writeln!(w, "{} {} {}", self.len(), self.len(), count)?;
        w.write_all(body.as_bytes())?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandRecord {
    pub offset: Vec<i64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandedOperatorRecord {
    pub kind: GeneratorKind,
    pub cutoffs: Vec<usize>,
    pub periods: Vec<f64>,
    pub bands: Vec<BandRecord>,
}

/// Union of the wavevectors stored in any component.
fn offset_set(vf: &VectorFieldSpec) -> Vec<MultiIndex> {
    let mut set: Vec<MultiIndex> = vf
        .components
        .iter()
        .flat_map(|c| c.keys().cloned())
        .collect();
    set.sort();
    set.dedup();
    set
}

fn coefficient(vf: &VectorFieldSpec, component: usize, p: &[i64]) -> Complex64 {
    vf.components[component]
        .get(&MultiIndex(p.to_vec()))
        .copied()
        .unwrap_or(ZERO)
}

/// Generic entry builder: `(m+p, m) ↦ sign · Σ_i i ω_i c^i_p · (m_i + θ p_i)`.
fn assemble(
    vf: &VectorFieldSpec,
    trunc: &TruncationSpec,
    kind: GeneratorKind,
    sign: f64,
    theta: f64,
) -> Result<SparseBandedOperator> {
    vf.check_against(trunc)?;
    let offsets = offset_set(vf);
    if offsets.is_empty() {
        return Ok(SparseBandedOperator::zero(trunc.clone(), kind));
    }
    let omega = trunc.wavenumbers();
    Ok(SparseBandedOperator::from_offsets(trunc, kind, offsets, |p, m| {
        let mut acc = ZERO;
        for (i, w) in omega.iter().enumerate() {
            let c = coefficient(vf, i, p);
            if c != ZERO {
                acc += c * Complex64::new(0.0, w * (m[i] as f64 + theta * p[i] as f64));
            }
        }
        acc * sign
    }))
}

/// Half-density Lie derivative `X_N = π_N (½ X·∇ + ½ ∇·(X ·)) |_{V_N}`,
/// entries `(m+p, m) = Σ_i i ω_i c^i_p (m_i + p_i/2)`. Anti-Hermitian for
/// real fields.
pub fn assemble_half_density_generator(
    vf: &VectorFieldSpec,
    trunc: &TruncationSpec,
) -> Result<SparseBandedOperator> {
    assemble(vf, trunc, GeneratorKind::HalfDensity, 1.0, 0.5)
}

/// Standard Galerkin generator for `∂_t ρ = -∇·(ρX)`,
/// entries `(m+p, m) = -Σ_i i ω_i c^i_p (m_i + p_i)`.
pub fn assemble_density_generator(
    vf: &VectorFieldSpec,
    trunc: &TruncationSpec,
) -> Result<SparseBandedOperator> {
    assemble(vf, trunc, GeneratorKind::Density, -1.0, 1.0)
}

/// Standard Galerkin generator for `∂_t f = -X·∇f`,
/// entries `(m+p, m) = -Σ_i i ω_i c^i_p m_i`.
pub fn assemble_transport_generator(
    vf: &VectorFieldSpec,
    trunc: &TruncationSpec,
) -> Result<SparseBandedOperator> {
    assemble(vf, trunc, GeneratorKind::Transport, -1.0, 0.0)
}

/// `max |A + A†|` entrywise.
pub fn antihermitian_defect(op: &SparseBandedOperator) -> f64 {
    let mut worst = 0.0f64;
    for band in &op.bands {
        for ((src, e), &t) in band.entries.iter().enumerate().zip(&band.targets) {
            if t != usize::MAX {
                // (A + A†)_{t,src} = A_{t,src} + conj(A_{src,t})
                let d = *e + op.entry(src, t).conj();
                worst = worst.max(d.norm());
            }
        }
    }
    worst
}

/// Truncated multiplication operator `H_f` with `(m', m) = ∫ conj(e_{m'}) f e_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservableMatrix {
    pub trunc: TruncationSpec,
    pub matrix: DMatrix<Complex64>,
}

impl ObservableMatrix {
    pub fn new(trunc: TruncationSpec, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = trunc.len();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for basis size {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { trunc, matrix })
    }

    pub fn identity(trunc: TruncationSpec) -> Self {
        let n = trunc.len();
        Self {
            trunc,
            matrix: DMatrix::identity(n, n),
        }
    }

    /// `max |H - H†|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.matrix.nrows();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..=j {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Sorted real eigenvalues of the Hermitian part.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let h = (&self.matrix + self.matrix.adjoint()) * Complex64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn product(&self, other: &ObservableMatrix) -> Result<ObservableMatrix> {
        if self.trunc != other.trunc {
            return Err(Error::DimensionMismatch("observables on different truncations".into()));
        }
        Ok(ObservableMatrix {
            trunc: self.trunc.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn max_abs_difference(&self, other: &ObservableMatrix) -> f64 {
        (&self.matrix - &other.matrix)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }
}

/// Multiplication operator of the function whose orthonormal coefficients are
/// `f`: entry `(m', m) = f̂_{m'-m} · Π L_i^{-1/2}`.
pub fn assemble_multiplication_operator(
    f: &SpectralField,
    trunc: &TruncationSpec,
) -> Result<ObservableMatrix> {
    if f.trunc.dim() != trunc.dim() {
        return Err(Error::DimensionMismatch(format!(
            "function is {}-dimensional, truncation {}",
            f.trunc.dim(),
            trunc.dim()
        )));
    }
    trunc.check_torus(f.trunc.periods(), "multiplication operator")?;
    let n = trunc.len();
    let scale = trunc.basis_scale();
    let index: Vec<MultiIndex> = (0..n).map(|i| trunc.multi_index(i)).collect();
    let mut diff = vec![0i64; trunc.dim()];
    let matrix = DMatrix::from_fn(n, n, |r, c| {
        for (d, (a, b)) in diff.iter_mut().zip(index[r].0.iter().zip(&index[c].0)) {
            *d = a - b;
        }
        f.get(&diff).map_or(ZERO, |v| v * scale)
    });
    Ok(ObservableMatrix {
        trunc: trunc.clone(),
        matrix,
    })
}
