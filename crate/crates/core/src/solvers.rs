//! End-to-end solvers: half-densities, densities through their square roots,
//! functions as multiplication operators, and the standard Galerkin baseline.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::basis::{analyze, fmt_f64, synthesize, GridField, SpectralField, SpectralFieldRecord, TruncationSpec};
use crate::error::{Error, Result};
use crate::operators::{
    assemble_density_generator, assemble_half_density_generator, assemble_multiplication_operator,
    ObservableMatrix, VectorFieldSpec,
};
use crate::propagation::{
    conjugate_observable, evolve_series, evolve_state, propagator_for_scheme, SchemeSpec,
};

const COMPLEX_DENSITY_TOL: f64 = 1e-12;
const VANISHING_DENSITY_RATIO: f64 = 1e-8;

/// Output of the density solver at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityResult {
    /// `ρ_N = ψ_N²` at the nodes of the dealiased grid.
    pub rho: GridField,
    /// The evolved half-density.
    pub psi: SpectralField,
    /// `Σ |ĉ_k|²`, conserved by unitary schemes.
    pub mass_spectral: f64,
}

impl DensityResult {
    /// Squares a half-density on the `4(K+1)` grid, where products of in-band
    /// fields are integrated exactly.
    pub fn from_half_density(psi: SpectralField) -> Result<Self> {
        let grid = synthesize(&psi, &psi.trunc.default_grid())?;
        let rho = grid.map(|v| v * v);
        let mass_spectral = psi.coeffs.iter().map(|c| c.norm_sqr()).sum();
        Ok(Self {
            rho,
            psi,
            mass_spectral,
        })
    }

    /// One row per node: `x1,…,xn,rho`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let dim = self.rho.dim();
        let mut header: Vec<String> = (1..=dim).map(|a| format!("x{a}")).collect();
        header.push("rho".into());
        wtr.write_record(&header)?;
        for (j, v) in self.rho.samples.iter().enumerate() {
            let mut row: Vec<String> = self.rho.node(j).iter().map(|x| fmt_f64(*x)).collect();
            row.push(fmt_f64(v.re));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn to_record(&self, t: f64, scheme: &SchemeSpec, mass_trace: &[(f64, f64)]) -> DensityResultRecord {
        DensityResultRecord {
            cutoffs: self.psi.trunc.cutoffs().to_vec(),
            t,
            scheme: scheme.clone(),
            mass_spectral: self.mass_spectral,
            mass_trace: mass_trace.to_vec(),
            psi: self.psi.to_record(),
        }
    }
}

/// JSON form of a [`DensityResult`]: coefficients plus run metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DensityResultRecord {
    pub cutoffs: Vec<usize>,
    pub t: f64,
    pub scheme: SchemeSpec,
    pub mass_spectral: f64,
    pub mass_trace: Vec<(f64, f64)>,
    pub psi: SpectralFieldRecord,
}

/// Evolves a half-density by `ż = -X_N z`.
pub fn solve_half_density(
    psi0: &SpectralField,
    vf: &VectorFieldSpec,
    t: f64,
    spec: &SchemeSpec,
) -> Result<SpectralField> {
    let gen = assemble_half_density_generator(vf, &psi0.trunc)?;
    let z = evolve_state(&gen, &psi0.coeffs, t, spec)?;
    SpectralField::new(psi0.trunc.clone(), z)
}

/// [`solve_half_density`] at every time in `times` (increasing), sharing one
/// assembled generator.
pub fn solve_half_density_series(
    psi0: &SpectralField,
    vf: &VectorFieldSpec,
    times: &[f64],
    spec: &SchemeSpec,
) -> Result<Vec<SpectralField>> {
    let gen = assemble_half_density_generator(vf, &psi0.trunc)?;
    evolve_series(&gen, &psi0.coeffs, times, spec)?
        .into_iter()
        .map(|z| SpectralField::new(psi0.trunc.clone(), z))
        .collect()
}

/// Pointwise square root `√ρ⁺ - i√ρ⁻`, so that `ψ² = ρ`.
pub fn sqrt_split(rho: &GridField) -> Result<GridField> {
    let scale = rho.samples.iter().map(|v| v.norm()).fold(1.0, f64::max);
    if let Some((node, v)) = rho
        .samples
        .iter()
        .enumerate()
        .find(|(_, v)| v.im.abs() > COMPLEX_DENSITY_TOL * scale)
    {
        return Err(Error::ComplexDensity { node, imag: v.im });
    }
    Ok(rho.map(|v| {
        if v.re >= 0.0 {
            Complex64::new(v.re.sqrt(), 0.0)
        } else {
            Complex64::new(0.0, -(-v.re).sqrt())
        }
    }))
}

/// Projects `√ρ0` onto the truncation.
pub fn initial_half_density(rho0: &GridField, trunc: &TruncationSpec) -> Result<SpectralField> {
    let re = rho0.real_parts();
    let max = re.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = re.iter().copied().fold(f64::INFINITY, f64::min);
    if min < VANISHING_DENSITY_RATIO * max {
        log::warn!(
            "initial density nearly vanishes (min {min:e}, max {max:e}); its square root is not smooth and spectral accuracy degrades"
        );
    }
    analyze(&sqrt_split(rho0)?, trunc)
}

/// Density solver: `ψ0 = √ρ0`, evolve `ψ`, report `ρ_N = ψ_N²`.
pub fn solve_density(
    rho0: &GridField,
    vf: &VectorFieldSpec,
    t: f64,
    trunc: &TruncationSpec,
    spec: &SchemeSpec,
) -> Result<DensityResult> {
    let psi0 = initial_half_density(rho0, trunc)?;
    DensityResult::from_half_density(solve_half_density(&psi0, vf, t, spec)?)
}

pub fn solve_density_series(
    rho0: &GridField,
    vf: &VectorFieldSpec,
    times: &[f64],
    trunc: &TruncationSpec,
    spec: &SchemeSpec,
) -> Result<Vec<DensityResult>> {
    let psi0 = initial_half_density(rho0, trunc)?;
    solve_half_density_series(&psi0, vf, times, spec)?
        .into_iter()
        .map(DensityResult::from_half_density)
        .collect()
}

/// Standard Galerkin baseline: evolves the Fourier coefficients of `ρ`
/// directly and samples them on the `4(K+1)` grid.
pub fn solve_density_standard(
    rho0: &GridField,
    vf: &VectorFieldSpec,
    t: f64,
    trunc: &TruncationSpec,
    spec: &SchemeSpec,
) -> Result<GridField> {
    let mut out = solve_density_standard_series(rho0, vf, &[t], trunc, spec)?;
    Ok(out.remove(0))
}

pub fn solve_density_standard_series(
    rho0: &GridField,
    vf: &VectorFieldSpec,
    times: &[f64],
    trunc: &TruncationSpec,
    spec: &SchemeSpec,
) -> Result<Vec<GridField>> {
    let rho_hat = analyze(rho0, trunc)?;
    let gen = assemble_density_generator(vf, trunc)?;
    let sizes = trunc.default_grid();
    evolve_series(&gen, &rho_hat.coeffs, times, spec)?
        .into_iter()
        .map(|z| synthesize(&SpectralField::new(trunc.clone(), z)?, &sizes))
        .collect()
}

/// Observable solver: `H(t) = U(t) H_f U(t)†`.
pub fn solve_observable(
    f0: &SpectralField,
    vf: &VectorFieldSpec,
    t: f64,
    trunc: &TruncationSpec,
    spec: &SchemeSpec,
) -> Result<ObservableMatrix> {
    let h0 = assemble_multiplication_operator(f0, trunc)?;
    let gen = assemble_half_density_generator(vf, trunc)?;
    let u = propagator_for_scheme(&gen, t, spec)?;
    conjugate_observable(&u, &h0)
}
