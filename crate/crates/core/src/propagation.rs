//! Time integration of the Galerkin ODEs `ż = G z`.
//!
//! Three schemes are unitary when `G` is anti-Hermitian: the dense
//! exponential (eigendecomposition of `i·X_N`), the Cayley midpoint rule, and
//! a restarted Krylov approximation of `exp(tG) z`. Classical RK4 is kept as a
//! non-conserving reference.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::TruncationSpec;
use crate::error::{Error, Result};
use crate::linalg::{
    axpy, dot, expm, expm_antihermitian, hermitian_eigh, max_abs, norm, scale, unitary_from_eigh,
    ZERO,
};
use crate::operators::{antihermitian_defect, GeneratorKind, ObservableMatrix, SparseBandedOperator};

/// Largest basis size for which dense matrices are formed.
pub const DEFAULT_DENSE_LIMIT: usize = 4096;
pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_KRYLOV_DIM: usize = 30;
const ANTIHERMITIAN_TOL: f64 = 1e-12;
const CG_RTOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[serde(alias = "expm")]
    DenseExpm,
    #[serde(alias = "cayley")]
    CayleyMidpoint,
    #[serde(alias = "krylov")]
    KrylovExpm,
    Rk4,
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expm" | "dense_expm" => Ok(Scheme::DenseExpm),
            "cayley" | "cayley_midpoint" => Ok(Scheme::CayleyMidpoint),
            "krylov" | "krylov_expm" => Ok(Scheme::KrylovExpm),
            "rk4" => Ok(Scheme::Rk4),
            other => Err(Error::InvalidScheme(format!("unknown scheme `{other}`"))),
        }
    }
}

/// Integrator choice and its controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeSpec {
    pub scheme: Scheme,
    /// Step size for `cayley_midpoint` and `rk4`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Local error tolerance for `krylov_expm`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_krylov_dim")]
    pub krylov_dim: usize,
    #[serde(default = "default_dense_limit")]
    pub dense_limit: usize,
}

fn default_tol() -> f64 {
    DEFAULT_TOL
}
fn default_krylov_dim() -> usize {
    DEFAULT_KRYLOV_DIM
}
fn default_dense_limit() -> usize {
    DEFAULT_DENSE_LIMIT
}

impl SchemeSpec {
    pub fn dense_expm() -> Self {
        Self {
            scheme: Scheme::DenseExpm,
            dt: None,
            tol: DEFAULT_TOL,
            krylov_dim: DEFAULT_KRYLOV_DIM,
            dense_limit: DEFAULT_DENSE_LIMIT,
        }
    }

    pub fn cayley(dt: f64) -> Self {
        Self {
            scheme: Scheme::CayleyMidpoint,
            dt: Some(dt),
            ..Self::dense_expm()
        }
    }

    pub fn krylov(tol: f64) -> Self {
        Self {
            scheme: Scheme::KrylovExpm,
            tol,
            ..Self::dense_expm()
        }
    }

    pub fn rk4(dt: f64) -> Self {
        Self {
            scheme: Scheme::Rk4,
            dt: Some(dt),
            ..Self::dense_expm()
        }
    }

    /// Dense exponential in one dimension, Krylov otherwise.
    pub fn default_for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self::dense_expm()
        } else {
            Self::krylov(DEFAULT_TOL)
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.scheme {
            Scheme::CayleyMidpoint | Scheme::Rk4 => match self.dt {
                Some(dt) if dt > 0.0 && dt.is_finite() => Ok(()),
                _ => Err(Error::InvalidScheme(format!(
                    "{:?} needs a positive step size",
                    self.scheme
                ))),
            },
            Scheme::KrylovExpm => {
                if !(self.tol > 0.0) {
                    Err(Error::InvalidScheme("krylov tolerance must be positive".into()))
                } else if self.krylov_dim < 2 {
                    Err(Error::InvalidScheme("krylov dimension must be at least 2".into()))
                } else {
                    Ok(())
                }
            }
            Scheme::DenseExpm => Ok(()),
        }
    }

    pub fn is_unitary(&self) -> bool {
        self.scheme != Scheme::Rk4
    }
}

/// Dense propagator `U = exp(-t X_N)` on `V_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryPropagator {
    pub trunc: TruncationSpec,
    pub matrix: DMatrix<Complex64>,
}

impl UnitaryPropagator {
    pub fn identity(trunc: TruncationSpec) -> Self {
        let n = trunc.len();
        Self {
            trunc,
            matrix: DMatrix::identity(n, n),
        }
    }

    pub fn apply(&self, z: &[Complex64]) -> Vec<Complex64> {
        let v = &self.matrix * DVector::from_column_slice(z);
        v.iter().copied().collect()
    }

    /// `self · other`, i.e. apply `other` first.
    pub fn compose(&self, other: &UnitaryPropagator) -> Result<UnitaryPropagator> {
        if self.trunc != other.trunc {
            return Err(Error::DimensionMismatch("propagators on different truncations".into()));
        }
        Ok(UnitaryPropagator {
            trunc: self.trunc.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }
}

/// `max |U†U - I|`.
pub fn unitarity_defect(u: &DMatrix<Complex64>) -> f64 {
    let n = u.ncols();
    max_abs(&(u.adjoint() * u - DMatrix::<Complex64>::identity(n, n)))
}

/// Eigendecomposition `i·X_N = V Λ V†` of a half-density generator, reusable
/// for any number of times since `exp(-t X_N) = V exp(itΛ) V†`.
#[derive(Debug, Clone)]
pub struct SpectralPropagator {
    trunc: TruncationSpec,
    vals: Vec<f64>,
    vecs: DMatrix<Complex64>,
}

impl SpectralPropagator {
    pub fn new(gen: &SparseBandedOperator, limit: usize) -> Result<Self> {
        if gen.kind() != GeneratorKind::HalfDensity {
            return Err(Error::InvalidArgument(format!(
                "dense unitary propagator needs a half-density generator, got {:?}",
                gen.kind()
            )));
        }
        if gen.len() > limit {
            return Err(Error::SizeGuard {
                size: gen.len(),
                limit,
            });
        }
        let defect = antihermitian_defect(gen);
        if defect > ANTIHERMITIAN_TOL {
            return Err(Error::NotAntiHermitian { defect });
        }
        let h = gen.to_dense() * Complex64::new(0.0, 1.0);
        let (vals, vecs) = hermitian_eigh(&h);
        Ok(Self {
            trunc: gen.trunc().clone(),
            vals,
            vecs,
        })
    }

    pub fn propagator(&self, t: f64) -> UnitaryPropagator {
        UnitaryPropagator {
            trunc: self.trunc.clone(),
            matrix: unitary_from_eigh(&self.vals, &self.vecs, t),
        }
    }

    pub fn apply(&self, z: &[Complex64], t: f64) -> Vec<Complex64> {
        // V (exp(itΛ) (V† z))
        let zv = DVector::from_column_slice(z);
        let mut w = self.vecs.adjoint() * zv;
        for (wi, &l) in w.iter_mut().zip(&self.vals) {
            *wi *= Complex64::from_polar(1.0, t * l);
        }
        (&self.vecs * w).iter().copied().collect()
    }
}

/// `U(t) = exp(-t X_N)` through the Hermitian eigendecomposition of `i X_N`.
pub fn dense_propagator(gen: &SparseBandedOperator, t: f64) -> Result<UnitaryPropagator> {
    check_time(t)?;
    Ok(SpectralPropagator::new(gen, DEFAULT_DENSE_LIMIT)?.propagator(t))
}

/// `U H U†`.
pub fn conjugate_observable(
    u: &UnitaryPropagator,
    h: &ObservableMatrix,
) -> Result<ObservableMatrix> {
    if u.trunc != h.trunc {
        return Err(Error::DimensionMismatch(
            "propagator and observable on different truncations".into(),
        ));
    }
    ObservableMatrix::new(h.trunc.clone(), &u.matrix * &h.matrix * u.matrix.adjoint())
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("time {t}")))
    }
}

/// Integrates `ż = G z` from `z0` over time `t` (negative `t` runs backward).
/// `G` is `-X_N` for half-density generators and the stored matrix otherwise.
pub fn evolve_state(
    gen: &SparseBandedOperator,
    z0: &[Complex64],
    t: f64,
    spec: &SchemeSpec,
) -> Result<Vec<Complex64>> {
    check_time(t)?;
    spec.validate()?;
    if z0.len() != gen.len() {
        return Err(Error::DimensionMismatch(format!(
            "state of length {} for a generator of size {}",
            z0.len(),
            gen.len()
        )));
    }
    if t == 0.0 || gen.is_empty() {
        return Ok(z0.to_vec());
    }
    match spec.scheme {
        Scheme::DenseExpm => dense_evolve(gen, z0, t, spec.dense_limit),
        Scheme::CayleyMidpoint => cayley_evolve(gen, z0, t, spec.dt.unwrap_or(f64::NAN)),
        Scheme::KrylovExpm => krylov_evolve(gen, z0, t, spec.tol, spec.krylov_dim),
        Scheme::Rk4 => Ok(rk4_evolve(gen, z0, t, spec.dt.unwrap_or(f64::NAN))),
    }
}

/// Evolves `z0` through an increasing list of output times, returning one
/// state per time. The dense scheme evaluates each time from the initial
/// state; the others step from the previous output.
pub fn evolve_series(
    gen: &SparseBandedOperator,
    z0: &[Complex64],
    times: &[f64],
    spec: &SchemeSpec,
) -> Result<Vec<Vec<Complex64>>> {
    spec.validate()?;
    if spec.scheme == Scheme::DenseExpm
        && gen.kind() == GeneratorKind::HalfDensity
        && !gen.is_empty()
    {
        let sp = SpectralPropagator::new(gen, spec.dense_limit)?;
        return times
            .iter()
            .map(|&t| {
                check_time(t)?;
                Ok(sp.apply(z0, t))
            })
            .collect();
    }
    let mut out = Vec::with_capacity(times.len());
    let mut z = z0.to_vec();
    let mut now = 0.0;
    for &t in times {
        z = evolve_state(gen, &z, t - now, spec)?;
        now = t;
        out.push(z.clone());
    }
    Ok(out)
}

/// Full propagator built with any scheme: dense eigendecomposition for
/// `dense_expm`, otherwise column by column from [`evolve_state`].
pub fn propagator_for_scheme(
    gen: &SparseBandedOperator,
    t: f64,
    spec: &SchemeSpec,
) -> Result<UnitaryPropagator> {
    check_time(t)?;
    if gen.len() > spec.dense_limit {
        return Err(Error::SizeGuard {
            size: gen.len(),
            limit: spec.dense_limit,
        });
    }
    if spec.scheme == Scheme::DenseExpm {
        if gen.is_empty() {
            return Ok(UnitaryPropagator::identity(gen.trunc().clone()));
        }
        return Ok(SpectralPropagator::new(gen, spec.dense_limit)?.propagator(t));
    }
    let n = gen.len();
    let mut matrix = DMatrix::from_element(n, n, ZERO);
    let mut e = vec![ZERO; n];
    for j in 0..n {
        e[j] = Complex64::new(1.0, 0.0);
        let col = evolve_state(gen, &e, t, spec)?;
        matrix.column_mut(j).copy_from_slice(&col);
        e[j] = ZERO;
    }
    Ok(UnitaryPropagator {
        trunc: gen.trunc().clone(),
        matrix,
    })
}

fn dense_evolve(
    gen: &SparseBandedOperator,
    z0: &[Complex64],
    t: f64,
    limit: usize,
) -> Result<Vec<Complex64>> {
    if gen.kind() == GeneratorKind::HalfDensity {
        return Ok(SpectralPropagator::new(gen, limit)?.apply(z0, t));
    }
    if gen.len() > limit {
        return Err(Error::SizeGuard {
            size: gen.len(),
            limit,
        });
    }
    let g = gen.generator_dense() * Complex64::new(t, 0.0);
    let v = expm(&g) * DVector::from_column_slice(z0);
    Ok(v.iter().copied().collect())
}

fn step_count(t: f64, dt: f64) -> (usize, f64) {
    let n = (t.abs() / dt).ceil().max(1.0) as usize;
    (n, t / n as f64)
}

fn rk4_evolve(gen: &SparseBandedOperator, z0: &[Complex64], t: f64, dt: f64) -> Vec<Complex64> {
    let (steps, h) = step_count(t, dt);
    let mut z = z0.to_vec();
    let mut tmp = vec![ZERO; z.len()];
    for _ in 0..steps {
        let k1 = gen.apply_generator(&z);
        for ((o, a), b) in tmp.iter_mut().zip(&z).zip(&k1) {
            *o = a + b * (0.5 * h);
        }
        let k2 = gen.apply_generator(&tmp);
        for ((o, a), b) in tmp.iter_mut().zip(&z).zip(&k2) {
            *o = a + b * (0.5 * h);
        }
        let k3 = gen.apply_generator(&tmp);
        for ((o, a), b) in tmp.iter_mut().zip(&z).zip(&k3) {
            *o = a + b * h;
        }
        let k4 = gen.apply_generator(&tmp);
        for (i, zi) in z.iter_mut().enumerate() {
            *zi += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    z
}

/// Cayley steps `(I - h/2 G) z_{k+1} = (I + h/2 G) z_k`.
fn cayley_evolve(
    gen: &SparseBandedOperator,
    z0: &[Complex64],
    t: f64,
    dt: f64,
) -> Result<Vec<Complex64>> {
    let (steps, h) = step_count(t, dt);
    let a = 0.5 * h;
    let mut z = z0.to_vec();
    for _ in 0..steps {
        let mut rhs = z.clone();
        gen.apply_generator_into(&z, &mut rhs, a);
        z = solve_shifted(gen, a, &rhs, &rhs)?;
    }
    Ok(z)
}

/// Solves `(I - a G) x = b` by conjugate gradients on the normal equations.
fn solve_shifted(
    gen: &SparseBandedOperator,
    a: f64,
    b: &[Complex64],
    guess: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = b.len();
    let apply_a = |v: &[Complex64]| {
        let mut out = v.to_vec();
        gen.apply_generator_into(v, &mut out, -a);
        out
    };
    let apply_ah = |v: &[Complex64]| {
        let mut out = v.to_vec();
        gen.apply_generator_adjoint_into(v, &mut out, -a);
        out
    };
    let bnorm = norm(b);
    if bnorm == 0.0 {
        return Ok(vec![ZERO; n]);
    }
    let mut x = guess.to_vec();
    let ax = apply_a(&x);
    let mut r: Vec<Complex64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    let mut s = apply_ah(&r);
    let mut p = s.clone();
    let mut gamma = norm(&s).powi(2);
    let max_iter = 2 * n + 50;
    let mut best = norm(&r);
    let mut stall = 0;
    for _ in 0..max_iter {
        let rn = norm(&r);
        if rn <= CG_RTOL * bnorm {
            return Ok(x);
        }
        if rn < best {
            best = rn;
            stall = 0;
        } else {
            stall += 1;
            if stall >= 5 {
                break;
            }
        }
        let q = apply_a(&p);
        let qq = norm(&q).powi(2);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        axpy(Complex64::new(alpha, 0.0), &p, &mut x);
        axpy(Complex64::new(-alpha, 0.0), &q, &mut r);
        s = apply_ah(&r);
        let gamma_new = norm(&s).powi(2);
        let beta = gamma_new / gamma;
        gamma = gamma_new;
        for (pi, si) in p.iter_mut().zip(&s) {
            *pi = si + *pi * beta;
        }
    }
    let residual = norm(&r) / bnorm;
    if residual <= 1e-11 {
        Ok(x)
    } else {
        Err(Error::SolveDiverged {
            iterations: max_iter,
            residual,
        })
    }
}

struct Arnoldi {
    basis: Vec<Vec<Complex64>>,
    /// Projected matrix, `m × m`.
    h: DMatrix<Complex64>,
    /// `h_{m+1,m}`; zero on an invariant subspace.
    residual: f64,
}

fn arnoldi(
    gen: &SparseBandedOperator,
    v0: &[Complex64],
    sign: f64,
    m_max: usize,
) -> Arnoldi {
    let mut basis: Vec<Vec<Complex64>> = vec![v0.to_vec()];
    let mut hfull = DMatrix::from_element(m_max + 1, m_max, ZERO);
    let mut residual = 0.0;
    let mut m = 0;
    let mut scale_est = 0.0f64;
    for j in 0..m_max {
        let mut w = vec![ZERO; v0.len()];
        gen.apply_generator_into(&basis[j], &mut w, sign);
        // Modified Gram-Schmidt, two passes.
        for _ in 0..2 {
            for (i, vi) in basis.iter().enumerate() {
                let c = dot(vi, &w);
                hfull[(i, j)] += c;
                axpy(-c, vi, &mut w);
            }
        }
        let hn = norm(&w);
        m = j + 1;
        scale_est = scale_est.max(hfull.column(j).iter().map(|v| v.norm()).fold(0.0, f64::max));
        if hn <= 1e-13 * scale_est.max(1.0) {
            residual = 0.0;
            break;
        }
        residual = hn;
        hfull[(j + 1, j)] = Complex64::new(hn, 0.0);
        if j + 1 < m_max {
            scale(1.0 / hn, &mut w);
            basis.push(w);
        }
    }
    basis.truncate(m);
    Arnoldi {
        basis,
        h: hfull.view((0, 0), (m, m)).into_owned(),
        residual,
    }
}

/// Restarted Krylov approximation of `exp(tG) z0` with local error control.
fn krylov_evolve(
    gen: &SparseBandedOperator,
    z0: &[Complex64],
    t: f64,
    tol: f64,
    m_max: usize,
) -> Result<Vec<Complex64>> {
    let n = z0.len();
    let m_max = m_max.min(n).max(1);
    let sign = t.signum();
    let total = t.abs();
    let anti = gen.kind() == GeneratorKind::HalfDensity;
    let mut w = z0.to_vec();
    let mut done = 0.0;
    let mut tau = total;
    while done < total {
        let beta = norm(&w);
        if beta == 0.0 {
            break;
        }
        let mut v0 = w.clone();
        scale(1.0 / beta, &mut v0);
        let kr = arnoldi(gen, &v0, sign, m_max);
        let m = kr.basis.len();
        let hm = if anti {
            (&kr.h - kr.h.adjoint()) * Complex64::new(0.5, 0.0)
        } else {
            kr.h.clone()
        };
        let remaining = total - done;
        tau = tau.min(remaining);
        let y = loop {
            let step = &hm * Complex64::new(tau, 0.0);
            let e = if anti { expm_antihermitian(&step) } else { expm(&step) };
            let y: Vec<Complex64> = e.column(0).iter().copied().collect();
            let err = beta * kr.residual * y[m - 1].norm();
            if err <= tol * beta * (tau / total).max(f64::EPSILON) {
                break y;
            }
            tau *= 0.5;
            if tau < 1e-14 * total {
                return Err(Error::InvalidScheme(
                    "krylov step size underflow; increase krylov_dim or tol".into(),
                ));
            }
        };
        let mut next = vec![ZERO; n];
        for (vi, yi) in kr.basis.iter().zip(&y) {
            axpy(yi * beta, vi, &mut next);
        }
        w = next;
        done += tau;
        if total - done <= 1e-14 * total {
            break;
        }
        tau = (2.0 * tau).min(total - done);
    }
    Ok(w)
}
