//! Conservation and accuracy measurements.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftDirection;
use serde::{Deserialize, Serialize};

use crate::basis::{analyze, synthesize, GridField, SpectralField, TruncationSpec};
use crate::error::{Error, Result};
use crate::fft::fft_nd;
use crate::operators::{
    assemble_half_density_generator, assemble_multiplication_operator,
    assemble_transport_generator, ObservableMatrix, VectorFieldSpec,
};
use crate::propagation::{conjugate_observable, evolve_series, propagator_for_scheme, SchemeSpec};

const HERMITIAN_TOL: f64 = 1e-8;

/// Trapezoid quadrature of `|ρ|`.
pub fn l1_norm_grid(rho: &GridField) -> f64 {
    rho.samples.iter().map(|v| v.norm()).sum::<f64>() * rho.cell_measure()
}

/// `Σ |ĉ_k|² = ∫ |ψ_N|²`.
pub fn nuclear_mass(psi: &SpectralField) -> f64 {
    psi.coeffs.iter().map(|c| c.norm_sqr()).sum()
}

/// Trapezoid quadrature of the negative part `max(-Re ρ, 0)`.
pub fn negativity(rho: &GridField) -> f64 {
    rho.samples.iter().map(|v| (-v.re).max(0.0)).sum::<f64>() * rho.cell_measure()
}

/// Largest sample magnitude.
pub fn sup_norm_grid(field: &GridField) -> f64 {
    field.samples.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

/// `max |λ|` of a Hermitian matrix.
pub fn operator_norm(h: &ObservableMatrix) -> Result<f64> {
    let defect = h.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian { defect });
    }
    Ok(h.eigenvalues().iter().map(|v| v.abs()).fold(0.0, f64::max))
}

/// `⟨ψ|H|ψ⟩`.
pub fn pairing(h: &ObservableMatrix, psi: &SpectralField) -> Result<Complex64> {
    if h.trunc != psi.trunc {
        return Err(Error::DimensionMismatch("observable and state on different truncations".into()));
    }
    let hz = &h.matrix * nalgebra::DVector::from_column_slice(&psi.coeffs);
    Ok(psi.coeffs.iter().zip(hz.iter()).map(|(a, b)| a.conj() * b).sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProductMethod {
    /// Multiplication operators conjugated by the unitary propagator.
    #[serde(alias = "halfdens")]
    HalfDensity,
    /// Standard Galerkin transport of the Fourier coefficients.
    Standard,
}

fn check_product_band(f: &SpectralField, g: &SpectralField, trunc: &TruncationSpec) -> Result<()> {
    if f.trunc.dim() != trunc.dim() || g.trunc.dim() != trunc.dim() {
        return Err(Error::DimensionMismatch("factor dimensions differ from truncation".into()));
    }
    for a in 0..trunc.dim() {
        let (kf, kg, k) = (f.trunc.cutoffs()[a], g.trunc.cutoffs()[a], trunc.cutoffs()[a]);
        if kf + kg > k {
            return Err(Error::BandwidthViolation(format!(
                "axis {a}: K_f + K_g = {} exceeds K = {k}",
                kf + kg
            )));
        }
    }
    Ok(())
}

/// Pointwise product of two fields, exact within `trunc` when the bands fit.
fn product_field(f: &SpectralField, g: &SpectralField, trunc: &TruncationSpec) -> Result<SpectralField> {
    let sizes = trunc.default_grid();
    let fg = synthesize(&f.retruncate(trunc)?, &sizes)?;
    let gg = synthesize(&g.retruncate(trunc)?, &sizes)?;
    let samples = fg.samples.iter().zip(&gg.samples).map(|(a, b)| a * b).collect();
    analyze(&GridField::new(fg.periods.clone(), sizes, samples)?, trunc)
}

/// Order-of-operations discrepancy between evolving `f·g` and multiplying the
/// evolved `f` and `g`, at each of `times`.
///
/// For [`ProductMethod::HalfDensity`] the product is formed as the operator
/// product `H_{f,N}(0) H_{g,N}(0)` and the result is a max-abs matrix entry.
/// For [`ProductMethod::Standard`] it is the sup over the `4(K+1)` grid of
/// `|(fg)_N(t) - f_N(t) g_N(t)|`.
pub fn product_discrepancy_series(
    f: &SpectralField,
    g: &SpectralField,
    vf: &VectorFieldSpec,
    times: &[f64],
    trunc: &TruncationSpec,
    spec: &SchemeSpec,
    method: ProductMethod,
) -> Result<Vec<f64>> {
    check_product_band(f, g, trunc)?;
    match method {
        ProductMethod::HalfDensity => {
            let hf = assemble_multiplication_operator(f, trunc)?;
            let hg = assemble_multiplication_operator(g, trunc)?;
            let hfg = hf.product(&hg)?;
            let gen = assemble_half_density_generator(vf, trunc)?;
            times
                .iter()
                .map(|&t| {
                    let u = propagator_for_scheme(&gen, t, spec)?;
                    let a = conjugate_observable(&u, &hfg)?;
                    let b = conjugate_observable(&u, &hf)?.product(&conjugate_observable(&u, &hg)?)?;
                    Ok(a.max_abs_difference(&b))
                })
                .collect()
        }
        ProductMethod::Standard => {
            let gen = assemble_transport_generator(vf, trunc)?;
            let fg = product_field(f, g, trunc)?;
            let sizes = trunc.default_grid();
            let evolve = |field: &SpectralField| -> Result<Vec<GridField>> {
                let z0 = field.retruncate(trunc)?.coeffs;
                evolve_series(&gen, &z0, times, spec)?
                    .into_iter()
                    .map(|z| synthesize(&SpectralField::new(trunc.clone(), z)?, &sizes))
                    .collect()
            };
            let (fs, gs, fgs) = (evolve(f)?, evolve(g)?, evolve(&fg)?);
            Ok(fs
                .iter()
                .zip(&gs)
                .zip(&fgs)
                .map(|((a, b), c)| {
                    a.samples
                        .iter()
                        .zip(&b.samples)
                        .zip(&c.samples)
                        .map(|((x, y), z)| (z - x * y).norm())
                        .fold(0.0, f64::max)
                })
                .collect())
        }
    }
}

pub fn product_discrepancy(
    f: &SpectralField,
    g: &SpectralField,
    vf: &VectorFieldSpec,
    t: f64,
    trunc: &TruncationSpec,
    spec: &SchemeSpec,
    method: ProductMethod,
) -> Result<f64> {
    Ok(product_discrepancy_series(f, g, vf, &[t], trunc, spec, method)?[0])
}

/// Least-squares slope of `log(error)` against `log(N)`.
pub fn fit_convergence(pairs: &[(f64, f64)]) -> Result<f64> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 (N, error) pairs, got {}",
            pairs.len()
        )));
    }
    if let Some((n, e)) = pairs.iter().find(|(n, e)| !(*e > 0.0) || !(*n > 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "non-positive entry (N = {n}, error = {e})"
        )));
    }
    let xs: Vec<f64> = pairs.iter().map(|(n, _)| n.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|(_, e)| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all N values are equal".into()));
    }
    Ok(sxy / sxx)
}

/// Integrates `field` over every axis not in `keep`, by trapezoid sums.
pub fn marginal(field: &GridField, keep: &[usize]) -> Result<GridField> {
    if keep.is_empty() || keep.iter().any(|&a| a >= field.dim()) {
        return Err(Error::InvalidArgument(format!("bad axis subset {keep:?}")));
    }
    let sizes: Vec<usize> = keep.iter().map(|&a| field.sizes[a]).collect();
    let periods: Vec<f64> = keep.iter().map(|&a| field.periods[a]).collect();
    let dropped: f64 = (0..field.dim())
        .filter(|a| !keep.contains(a))
        .map(|a| field.periods[a] / field.sizes[a] as f64)
        .product();
    let mut out = vec![Complex64::new(0.0, 0.0); sizes.iter().product()];
    let mut idx = vec![0usize; field.dim()];
    for v in &field.samples {
        let flat = keep.iter().fold(0usize, |acc, &a| acc * field.sizes[a] + idx[a]);
        out[flat] += v * dropped;
        for a in (0..field.dim()).rev() {
            idx[a] += 1;
            if idx[a] < field.sizes[a] {
                break;
            }
            idx[a] = 0;
        }
    }
    GridField::new(periods, sizes, out)
}

/// Averages a 1-D trigonometric polynomial, given by its node samples, over
/// `bins` equal cells `[bL/bins, (b+1)L/bins)`. Exact when the samples'
/// bandwidth is below half the node count.
pub fn bin_average(field: &GridField, bins: usize) -> Result<GridField> {
    if field.dim() != 1 || bins == 0 {
        return Err(Error::InvalidArgument("bin_average needs a 1-D grid and bins > 0".into()));
    }
    let m = field.sizes[0];
    let l = field.periods[0];
    let mut hat = field.samples.clone();
    fft_nd(&mut hat, &[m], FftDirection::Forward);
    let w = 2.0 * PI / l;
    let width = l / bins as f64;
    let half = (m as i64 - 1) / 2;
    let out: Vec<Complex64> = (0..bins)
        .map(|b| {
            let a0 = b as f64 * width;
            let a1 = a0 + width;
            let mut acc = hat[0] * width;
            for q in 1..=half {
                for (qq, slot) in [(q, q as usize), (-q, m - q as usize)] {
                    let k = qq as f64 * w;
                    let integral = (Complex64::from_polar(1.0, k * a1) - Complex64::from_polar(1.0, k * a0))
                        / Complex64::new(0.0, k);
                    acc += hat[slot] * integral;
                }
            }
            acc / (m as f64 * width)
        })
        .collect();
    GridField::new(vec![l], vec![bins], out)
}

/// `∫ |a - b|` by trapezoid sums over a shared grid.
pub fn l1_distance(a: &GridField, b: &GridField) -> Result<f64> {
    if a.sizes != b.sizes || a.periods != b.periods {
        return Err(Error::DimensionMismatch("grids differ".into()));
    }
    Ok(a.samples
        .iter()
        .zip(&b.samples)
        .map(|(x, y)| (x - y).norm())
        .sum::<f64>()
        * a.cell_measure())
}
