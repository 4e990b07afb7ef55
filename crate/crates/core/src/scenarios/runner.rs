//! Experiment drivers. Each run writes its tables into the output directory
//! (CSV or JSON) together with `manifest.json`, which records the scenario,
//! its hash, seeds, tolerances and a digest of every file written.

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::basis::{analyze, fmt_f64, synthesize, GridField, SpectralField, TruncationSpec};
use crate::diagnostics::{
    bin_average, fit_convergence, l1_distance, l1_norm_grid, marginal, negativity,
    operator_norm, pairing, product_discrepancy_series, sup_norm_grid, ProductMethod,
};
use crate::error::{Error, Result, StageExt};
use crate::operators::{
    assemble_density_generator, assemble_half_density_generator, assemble_multiplication_operator,
    assemble_transport_generator, VectorFieldSpec,
};
use crate::particles::{advect_particles, histogram_marginal, sample_wrapped_gaussian};
use crate::propagation::{conjugate_observable, evolve_series, evolve_state, propagator_for_scheme};
use crate::solvers::{initial_half_density, solve_density_series, solve_density_standard_series, solve_half_density};

use super::config::{InitialCondition, OutputFormat, Scenario, Solver, VectorFieldConfig};
use super::exact::exact_s1_density;

/// Entrywise tolerance for half-density vs density generators of a
/// divergence-free field.
pub const GENERATOR_MATCH_TOL: f64 = 1e-12;

/// Column-labelled numeric table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

/// What a run produced.
#[derive(Debug, Clone)]
pub struct RunReport {
    pub dir: PathBuf,
    /// File name to SHA-256 digest, manifest excluded.
    pub files: BTreeMap<String, String>,
    pub summary: BTreeMap<String, f64>,
    pub tables: BTreeMap<String, Table>,
}

struct Output {
    dir: PathBuf,
    format: OutputFormat,
    files: BTreeMap<String, String>,
    tables: BTreeMap<String, Table>,
}

impl Output {
    fn create(dir: &Path, format: OutputFormat) -> Result<Self> {
        fs::create_dir_all(dir).stage("output")?;
        Ok(Output {
            dir: dir.to_path_buf(),
            format,
            files: BTreeMap::new(),
            tables: BTreeMap::new(),
        })
    }

    fn record(&mut self, name: String, bytes: &[u8]) -> Result<()> {
        fs::write(self.dir.join(&name), bytes).stage("output")?;
        self.files.insert(name, hex::encode(Sha256::digest(bytes)));
        Ok(())
    }

    fn table(&mut self, stem: &str, table: Table) -> Result<()> {
        let (name, bytes) = match self.format {
            OutputFormat::Csv => {
                let mut wtr = csv::Writer::from_writer(Vec::new());
                wtr.write_record(&table.columns).stage("output")?;
                for row in &table.rows {
                    wtr.write_record(row.iter().map(|v| fmt_f64(*v))).stage("output")?;
                }
                let bytes = wtr.into_inner().map_err(|e| Error::Io(e.into_error())).stage("output")?;
                (format!("{stem}.csv"), bytes)
            }
            OutputFormat::Json => (
                format!("{stem}.json"),
                serde_json::to_vec_pretty(&table).stage("output")?,
            ),
        };
        self.record(name, &bytes)?;
        self.tables.insert(stem.to_string(), table);
        Ok(())
    }

    fn finish(
        mut self,
        command: &str,
        scn: &Scenario,
        tolerances: BTreeMap<&str, f64>,
        summary: BTreeMap<String, f64>,
    ) -> Result<RunReport> {
        let config = scn.to_json()?;
        let manifest = serde_json::json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": scn,
            "config_sha256": hex::encode(Sha256::digest(config.as_bytes())),
            "seeds": { "particles": scn.seed },
            "scheme": scn.scheme,
            "tolerances": tolerances,
            "files": self.files,
            "summary": summary,
        });
        let bytes = serde_json::to_vec_pretty(&manifest).stage("output")?;
        fs::write(self.dir.join("manifest.json"), bytes).stage("output")?;
        let files = std::mem::take(&mut self.files);
        Ok(RunReport {
            dir: self.dir,
            files,
            summary,
            tables: self.tables,
        })
    }
}

fn base_tolerances(scn: &Scenario) -> BTreeMap<&'static str, f64> {
    let mut t = BTreeMap::new();
    t.insert("scheme_tol", scn.scheme.tol);
    if let Some(dt) = scn.scheme.dt {
        t.insert("scheme_dt", dt);
    }
    t.insert("particle_dt", scn.particle_dt);
    t
}

fn max_drift(values: &[f64]) -> f64 {
    values.iter().map(|v| (v - values[0]).abs()).fold(0.0, f64::max)
}

/// Resolves the exact benchmark density when the scenario admits one.
fn exact_density(scn: &Scenario) -> Option<impl Fn(f64, f64) -> f64> {
    match (&scn.vector_field, &scn.initial) {
        (VectorFieldConfig::S1Benchmark, InitialCondition::Uniform { value }) => {
            let v = *value;
            Some(move |x: f64, t: f64| v * exact_s1_density(x, t))
        }
        _ => None,
    }
}

/// One row of a convergence study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub modes: usize,
    /// Modes per axis, `2K + 1`.
    pub n: usize,
    pub alg2_error: f64,
    pub standard_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    /// `exact` for the circle benchmark, else `K = <max>` (self-convergence
    /// against the finest listed truncation, which then has no row).
    pub reference: String,
    pub t: f64,
    pub rows: Vec<ConvergenceRow>,
    pub alg2_slope: f64,
    pub standard_slope: Option<f64>,
}

impl ConvergenceStudy {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["K", "N", "alg2_l1_error", "standard_l1_error"]);
        for r in &self.rows {
            t.rows.push(vec![
                r.modes as f64,
                r.n as f64,
                r.alg2_error,
                r.standard_error.unwrap_or(f64::NAN),
            ]);
        }
        t
    }
}

struct ConvergenceSample {
    alg2: GridField,
    standard: Option<GridField>,
}

fn convergence_sample(
    scn: &Scenario,
    vf: &VectorFieldSpec,
    k: usize,
    sizes: &[usize],
    with_standard: bool,
) -> Result<ConvergenceSample> {
    let trunc = TruncationSpec::new(vec![k; scn.dim], scn.periods.clone())?;
    let rho0 = scn.initial.grid(&trunc)?;
    let psi0 = initial_half_density(&rho0, &trunc)?;
    let psi = solve_half_density(&psi0, vf, scn.convergence_time, &scn.scheme)?;
    let alg2 = synthesize(&psi, sizes)?.map(|v| v * v);
    let standard = if with_standard {
        let gen = assemble_density_generator(vf, &trunc)?;
        let z = evolve_state(&gen, &analyze(&rho0, &trunc)?.coeffs, scn.convergence_time, &scn.scheme)?;
        Some(synthesize(&SpectralField::new(trunc, z)?, sizes)?)
    } else {
        None
    };
    Ok(ConvergenceSample { alg2, standard })
}

/// L¹ errors of the density solvers at `convergence_time` over
/// `convergence_modes`, measured on the dealiased grid of the largest `K`,
/// and their log-log slopes against `2K + 1`.
pub fn convergence_study(scn: &Scenario) -> Result<ConvergenceStudy> {
    scn.validate().stage("config")?;
    let vf = scn.vector_field().stage("config")?;
    let mut modes = scn.convergence_modes.clone();
    modes.sort_unstable();
    modes.dedup();
    let kmax = *modes.last().ok_or_else(|| Error::InvalidArgument("no convergence modes".into()).in_stage("config"))?;
    let sizes = vec![4 * (kmax + 1); scn.dim];
    let with_standard = scn.has(Solver::Standard);
    let exact = exact_density(scn);
    let t = scn.convergence_time;

    let reference = match &exact {
        Some(f) => GridField::from_real_fn(scn.periods.clone(), sizes.clone(), |x| f(x[0], t)).stage("convergence")?,
        None => {
            let r = convergence_sample(scn, &vf, kmax, &sizes, false).stage("convergence")?;
            modes.pop();
            r.alg2
        }
    };
    let samples: Vec<(usize, ConvergenceSample)> = modes
        .par_iter()
        .map(|&k| convergence_sample(scn, &vf, k, &sizes, with_standard).map(|s| (k, s)))
        .collect::<Result<_>>()
        .stage("convergence")?;
    let mut rows = Vec::new();
    for (k, s) in samples {
        rows.push(ConvergenceRow {
            modes: k,
            n: 2 * k + 1,
            alg2_error: l1_distance(&s.alg2, &reference)?,
            standard_error: s.standard.map(|g| l1_distance(&g, &reference)).transpose()?,
        });
    }
    let alg2_slope = fit_convergence(&rows.iter().map(|r| (r.n as f64, r.alg2_error)).collect::<Vec<_>>())
        .stage("convergence-fit")?;
    let standard_slope = if with_standard {
        Some(
            fit_convergence(&rows.iter().map(|r| (r.n as f64, r.standard_error.unwrap_or(f64::NAN))).collect::<Vec<_>>())
                .stage("convergence-fit")?,
        )
    } else {
        None
    };
    Ok(ConvergenceStudy {
        reference: if exact.is_some() { "exact".into() } else { format!("K = {kmax}") },
        t,
        rows,
        alg2_slope,
        standard_slope,
    })
}

/// Conservation columns of one density solver across the snapshot times.
struct DensitySeries {
    rho: Vec<GridField>,
    mass: Option<Vec<f64>>,
    psi: Option<Vec<SpectralField>>,
}

fn run_alg2(scn: &Scenario, vf: &VectorFieldSpec, rho0: &GridField, trunc: &TruncationSpec, times: &[f64]) -> Result<DensitySeries> {
    let res = solve_density_series(rho0, vf, times, trunc, &scn.scheme).stage("alg2")?;
    Ok(DensitySeries {
        mass: Some(res.iter().map(|r| r.mass_spectral).collect()),
        psi: Some(res.iter().map(|r| r.psi.clone()).collect()),
        rho: res.into_iter().map(|r| r.rho).collect(),
    })
}

fn run_standard(scn: &Scenario, vf: &VectorFieldSpec, rho0: &GridField, trunc: &TruncationSpec, times: &[f64]) -> Result<DensitySeries> {
    Ok(DensitySeries {
        rho: solve_density_standard_series(rho0, vf, times, trunc, &scn.scheme).stage("standard")?,
        mass: None,
        psi: None,
    })
}

fn conservation_table(times: &[f64], alg2: Option<&DensitySeries>, standard: Option<&DensitySeries>, summary: &mut BTreeMap<String, f64>) -> Table {
    let mut cols = vec!["t"];
    if alg2.is_some() {
        cols.extend(["alg2_nuclear_mass", "alg2_l1", "alg2_negativity"]);
    }
    if standard.is_some() {
        cols.extend(["standard_l1", "standard_negativity"]);
    }
    let mut table = Table::new(&cols);
    for (i, &t) in times.iter().enumerate() {
        let mut row = vec![t];
        if let Some(a) = alg2 {
            row.push(a.mass.as_ref().map_or(f64::NAN, |m| m[i]));
            row.push(l1_norm_grid(&a.rho[i]));
            row.push(negativity(&a.rho[i]));
        }
        if let Some(s) = standard {
            row.push(l1_norm_grid(&s.rho[i]));
            row.push(negativity(&s.rho[i]));
        }
        table.rows.push(row);
    }
    if alg2.is_some() {
        let m = table.column("alg2_nuclear_mass").unwrap_or_default();
        summary.insert("alg2_mass_rel_drift".into(), max_drift(&m) / m[0].abs().max(f64::MIN_POSITIVE));
        let n = table.column("alg2_negativity").unwrap_or_default();
        summary.insert("alg2_max_negativity".into(), n.iter().copied().fold(0.0, f64::max));
    }
    if standard.is_some() {
        let l1 = table.column("standard_l1").unwrap_or_default();
        summary.insert("standard_l1_drift".into(), max_drift(&l1));
        let n = table.column("standard_negativity").unwrap_or_default();
        summary.insert("standard_max_negativity".into(), n.iter().copied().fold(0.0, f64::max));
    }
    table
}

fn require(cond: bool, stage: &str, msg: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg.into()).in_stage(stage))
    }
}

/// Circle benchmark: density snapshots, conservation series, convergence
/// table, and (with `alg3`) product-discrepancy and norm series for
/// `f = sin x`, `g = cos x`.
pub fn run_benchmark_s1(scn: &Scenario) -> Result<RunReport> {
    scn.validate().stage("config")?;
    require(scn.dim == 1, "config", "bench-s1 needs dim = 1")?;
    require(
        scn.vector_field == VectorFieldConfig::S1Benchmark,
        "config",
        "bench-s1 needs the s1_benchmark vector field",
    )?;
    let trunc = scn.truncation().stage("config")?;
    let vf = scn.vector_field().stage("config")?;
    let times = scn.times();
    let rho0 = scn.initial.grid(&trunc).stage("initial-condition")?;
    let mut out = Output::create(&scn.output.dir, scn.output.format)?;
    let mut summary = BTreeMap::new();

    let alg2 = scn.has(Solver::Alg2).then(|| run_alg2(scn, &vf, &rho0, &trunc, &times)).transpose()?;
    let standard = scn.has(Solver::Standard).then(|| run_standard(scn, &vf, &rho0, &trunc, &times)).transpose()?;
    let exact = exact_density(scn);

    let mut cols = vec!["t", "x"];
    if exact.is_some() {
        cols.push("exact");
    }
    if alg2.is_some() {
        cols.push("alg2");
    }
    if standard.is_some() {
        cols.push("standard");
    }
    let mut snaps = Table::new(&cols);
    let grid = trunc.default_grid();
    let nodes = grid[0];
    let mut exact_l1: Vec<(f64, f64)> = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        for j in 0..nodes {
            let x = trunc.periods()[0] * j as f64 / nodes as f64;
            let mut row = vec![t, x];
            let e = exact.as_ref().map(|f| f(x, t));
            if let Some(e) = e {
                row.push(e);
            }
            if let Some(a) = &alg2 {
                row.push(a.rho[i].samples[j].re);
            }
            if let Some(s) = &standard {
                row.push(s.rho[i].samples[j].re);
            }
            snaps.rows.push(row);
        }
        if let (Some(f), Some(a)) = (&exact, &alg2) {
            let ex = GridField::from_real_fn(trunc.periods().to_vec(), grid.clone(), |x| f(x[0], t))?;
            exact_l1.push((t, l1_distance(&a.rho[i], &ex)?));
        }
    }
    out.table("density_snapshots", snaps)?;
    let cons = conservation_table(&times, alg2.as_ref(), standard.as_ref(), &mut summary);
    out.table("conservation", cons)?;
    if let Some(&(_, e)) = exact_l1.last() {
        summary.insert("alg2_l1_error_final".into(), e);
    }

    if scn.has(Solver::Alg2) && !scn.convergence_modes.is_empty() {
        let study = convergence_study(scn)?;
        summary.insert("alg2_convergence_slope".into(), study.alg2_slope);
        if let Some(s) = study.standard_slope {
            summary.insert("standard_convergence_slope".into(), s);
        }
        out.table("convergence", study.table())?;
    }

    if scn.has(Solver::Alg3) {
        let obs = observable_series(scn, &vf, &trunc, &times, alg2.as_ref().and_then(|a| a.psi.as_deref()), &mut summary)
            .stage("alg3")?;
        out.table("observables", obs)?;
    }

    let mut tol = base_tolerances(scn);
    tol.insert("mass_rel_drift_target", 1e-10);
    out.finish("bench-s1", scn, tol, summary)
}

fn observable_series(
    scn: &Scenario,
    vf: &VectorFieldSpec,
    trunc: &TruncationSpec,
    times: &[f64],
    psi: Option<&[SpectralField]>,
    summary: &mut BTreeMap<String, f64>,
) -> Result<Table> {
    let l = trunc.periods()[0];
    let t1 = TruncationSpec::uniform(1, 1, l)?;
    let sizes = t1.default_grid();
    let f = analyze(&GridField::from_real_fn(vec![l], sizes.clone(), |x| (x[0] * std::f64::consts::TAU / l).sin())?, &t1)?;
    let g = analyze(&GridField::from_real_fn(vec![l], sizes, |x| (x[0] * std::f64::consts::TAU / l).cos())?, &t1)?;

    let d_alg3 = product_discrepancy_series(&f, &g, vf, times, trunc, &scn.scheme, ProductMethod::HalfDensity)?;
    let d_std = product_discrepancy_series(&f, &g, vf, times, trunc, &scn.scheme, ProductMethod::Standard)?;

    let hf = assemble_multiplication_operator(&f, trunc)?;
    let spec0 = hf.eigenvalues();
    let gen = assemble_half_density_generator(vf, trunc)?;
    let transport = assemble_transport_generator(vf, trunc)?;
    let f_std = evolve_series(&transport, &f.retruncate(trunc)?.coeffs, times, &scn.scheme)?;
    let pair0 = psi.map(|p| pairing(&hf, &p[0])).transpose()?;

    let mut cols = vec!["t", "discrepancy_alg3", "discrepancy_standard", "opnorm_alg3", "supnorm_standard", "spectrum_drift_alg3"];
    if pair0.is_some() {
        cols.extend(["pairing_re", "pairing_drift"]);
    }
    let mut table = Table::new(&cols);
    for (i, &t) in times.iter().enumerate() {
        let u = propagator_for_scheme(&gen, t, &scn.scheme)?;
        let h = conjugate_observable(&u, &hf)?;
        let ev = h.eigenvalues();
        let drift = ev.iter().zip(&spec0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let fs = synthesize(&SpectralField::new(trunc.clone(), f_std[i].clone())?, &trunc.default_grid())?;
        let mut row = vec![t, d_alg3[i], d_std[i], operator_norm(&h)?, sup_norm_grid(&fs), drift];
        if let (Some(p0), Some(p)) = (pair0, psi) {
            let v: Complex64 = pairing(&h, &p[i])?;
            row.push(v.re);
            row.push((v - p0).norm());
        }
        table.rows.push(row);
    }
    let colmax = |name: &str| table.column(name).map(|c| c.iter().copied().fold(0.0, f64::max));
    if let Some(v) = colmax("discrepancy_alg3") {
        summary.insert("alg3_max_discrepancy".into(), v);
    }
    if let Some(v) = colmax("discrepancy_standard") {
        summary.insert("standard_max_discrepancy".into(), v);
    }
    if let Some(v) = colmax("spectrum_drift_alg3") {
        summary.insert("alg3_max_spectrum_drift".into(), v);
    }
    if let Some(v) = colmax("pairing_drift") {
        summary.insert("alg3_max_pairing_drift".into(), v);
    }
    if let Some(c) = table.column("supnorm_standard") {
        summary.insert("standard_supnorm_drift".into(), max_drift(&c));
    }
    Ok(table)
}

/// Bin-averaged marginal on the last axis.
fn z_marginal(rho: &GridField, bins: usize) -> Result<GridField> {
    bin_average(&marginal(rho, &[rho.dim() - 1])?, bins)
}

/// ABC flow on the unit 3-torus: z-marginals for each solver, conservation
/// series, and for `D = 0` a check that the half-density and density
/// generators coincide.
pub fn run_abc(scn: &Scenario) -> Result<RunReport> {
    scn.validate().stage("config")?;
    require(scn.dim == 3, "config", "abc needs dim = 3")?;
    let d = scn.vector_field.abc_d();
    require(d.is_some(), "config", "abc needs an abc_modified or abc_printed vector field")?;
    let trunc = scn.truncation().stage("config")?;
    let vf = scn.vector_field().stage("config")?;
    let times = scn.times();
    let mut out = Output::create(&scn.output.dir, scn.output.format)?;
    let mut summary = BTreeMap::new();

    let half = assemble_half_density_generator(&vf, &trunc).stage("generator-check")?;
    let dens = assemble_density_generator(&vf, &trunc).stage("generator-check")?;
    let gen_diff = half.max_entry_difference(&dens, 1.0).stage("generator-check")?;
    summary.insert("generator_max_difference".into(), gen_diff);
    if d == Some(0.0) && gen_diff > GENERATOR_MATCH_TOL {
        return Err(Error::InvalidArgument(format!(
            "half-density and density generators differ by {gen_diff:e} for a divergence-free field"
        ))
        .in_stage("generator-check"));
    }

    let rho0 = scn.initial.grid(&trunc).stage("initial-condition")?;
    let alg2 = scn.has(Solver::Alg2).then(|| run_alg2(scn, &vf, &rho0, &trunc, &times)).transpose()?;
    let standard = scn.has(Solver::Standard).then(|| run_standard(scn, &vf, &rho0, &trunc, &times)).transpose()?;
    let particles = if scn.has(Solver::Particles) {
        Some(particle_marginals(scn, &vf, &times).stage("particles")?)
    } else {
        None
    };

    let bins = scn.marginal_bins;
    let marg = |s: &Option<DensitySeries>, stage: &str| -> Result<Option<Vec<GridField>>> {
        s.as_ref()
            .map(|s| s.rho.iter().map(|r| z_marginal(r, bins)).collect::<Result<Vec<_>>>())
            .transpose()
            .stage(stage)
    };
    let m_alg2 = marg(&alg2, "alg2")?;
    let m_std = marg(&standard, "standard")?;

    let mut cols = vec!["t", "z"];
    for (name, present) in [("alg2", m_alg2.is_some()), ("standard", m_std.is_some()), ("particles", particles.is_some())] {
        if present {
            cols.push(name);
        }
    }
    let mut table = Table::new(&cols);
    let lz = scn.periods[2];
    for (i, &t) in times.iter().enumerate() {
        for b in 0..bins {
            let mut row = vec![t, lz * b as f64 / bins as f64];
            for m in [&m_alg2, &m_std, &particles].into_iter().flatten() {
                row.push(m[i].samples[b].re);
            }
            table.rows.push(row);
        }
    }
    out.table("marginals", table)?;

    let mut cons = conservation_table(&times, alg2.as_ref(), standard.as_ref(), &mut summary);
    if let (Some(a), Some(p)) = (&m_alg2, &particles) {
        cons.columns.push("marginal_l1_alg2_particles".into());
        let mut worst: f64 = 0.0;
        for (i, row) in cons.rows.iter_mut().enumerate() {
            let dist = l1_distance(&a[i], &p[i])?;
            worst = worst.max(dist);
            row.push(dist);
        }
        summary.insert("marginal_l1_alg2_particles_final".into(), *cons.rows.last().and_then(|r| r.last()).unwrap_or(&f64::NAN));
        summary.insert("marginal_l1_alg2_particles_max".into(), worst);
    }
    out.table("conservation", cons)?;

    let mut tol = base_tolerances(scn);
    tol.insert("generator_match", GENERATOR_MATCH_TOL);
    out.finish("abc", scn, tol, summary)
}

fn particle_marginals(scn: &Scenario, vf: &VectorFieldSpec, times: &[f64]) -> Result<Vec<GridField>> {
    let InitialCondition::WrappedGaussian { mean, sigma } = &scn.initial else {
        return Err(Error::InvalidArgument("particles need a wrapped_gaussian initial condition".into()));
    };
    let mut ens = sample_wrapped_gaussian(mean, sigma, &scn.periods, scn.particles, scn.seed)?;
    let field = vf.evaluator();
    let axis = scn.dim - 1;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        ens = advect_particles(&ens, |x, o| field.evaluate(x, o), t - now, scn.particle_dt)?;
        now = t;
        out.push(histogram_marginal(&ens, &[axis], scn.marginal_bins)?);
    }
    Ok(out)
}

fn grid_table(field: &GridField, value: &str) -> Table {
    let mut cols: Vec<String> = (1..=field.dim()).map(|a| format!("x{a}")).collect();
    cols.push(value.to_string());
    let mut t = Table { columns: cols, rows: Vec::with_capacity(field.len()) };
    for (j, v) in field.samples.iter().enumerate() {
        let mut row = field.node(j);
        row.push(v.re);
        t.rows.push(row);
    }
    t
}

/// Generic run of any scenario: conservation series plus the final density
/// of each grid solver and, with particles, the final ensemble.
pub fn run_solve(scn: &Scenario) -> Result<RunReport> {
    scn.validate().stage("config")?;
    let trunc = scn.truncation().stage("config")?;
    let vf = scn.vector_field().stage("config")?;
    let times = scn.times();
    let rho0 = scn.initial.grid(&trunc).stage("initial-condition")?;
    let mut out = Output::create(&scn.output.dir, scn.output.format)?;
    let mut summary = BTreeMap::new();
    if scn.has(Solver::Alg3) {
        log::warn!("alg3 observables are reported by bench-s1; ignored by solve");
    }

    let alg2 = scn.has(Solver::Alg2).then(|| run_alg2(scn, &vf, &rho0, &trunc, &times)).transpose()?;
    let standard = scn.has(Solver::Standard).then(|| run_standard(scn, &vf, &rho0, &trunc, &times)).transpose()?;
    let cons = conservation_table(&times, alg2.as_ref(), standard.as_ref(), &mut summary);
    out.table("conservation", cons)?;
    if let Some(a) = &alg2 {
        out.table("density_alg2", grid_table(a.rho.last().expect("times is non-empty"), "rho"))?;
    }
    if let Some(s) = &standard {
        out.table("density_standard", grid_table(s.rho.last().expect("times is non-empty"), "rho"))?;
    }
    if scn.has(Solver::Particles) {
        let InitialCondition::WrappedGaussian { mean, sigma } = &scn.initial else {
            return Err(Error::InvalidArgument("particles need a wrapped_gaussian initial condition".into()).in_stage("particles"));
        };
        let ens = sample_wrapped_gaussian(mean, sigma, &scn.periods, scn.particles, scn.seed).stage("particles")?;
        let field = vf.evaluator();
        let ens = advect_particles(&ens, |x, o| field.evaluate(x, o), scn.t_final, scn.particle_dt).stage("particles")?;
        let mut buf = BufWriter::new(Vec::new());
        ens.write_csv(&mut buf).stage("output")?;
        let bytes = buf.into_inner().map_err(|e| Error::Io(e.into_error())).stage("output")?;
        out.record("particles.csv".into(), &bytes)?;
    }
    out.finish("solve", scn, base_tolerances(scn), summary)
}

/// Convergence table for any scenario.
pub fn run_convergence(scn: &Scenario) -> Result<RunReport> {
    let study = convergence_study(scn)?;
    let mut out = Output::create(&scn.output.dir, scn.output.format)?;
    let mut summary = BTreeMap::new();
    summary.insert("alg2_convergence_slope".into(), study.alg2_slope);
    if let Some(s) = study.standard_slope {
        summary.insert("standard_convergence_slope".into(), s);
    }
    out.table("convergence", study.table())?;
    out.finish("convergence", scn, base_tolerances(scn), summary)
}
