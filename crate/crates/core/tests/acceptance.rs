//! Acceptance criteria. Each test prints one `PASS`/`FAIL` line and then
//! asserts it, so `cargo test --test acceptance -- --nocapture` gives the
//! full scorecard.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, TAU};
use std::path::Path;
use std::time::{Duration, Instant};

use num_complex::Complex64;

use halfdens::basis::{analyze, synthesize, GridField, SpectralField, TruncationSpec};
use halfdens::diagnostics::{negativity, operator_norm, pairing, product_discrepancy, ProductMethod};
use halfdens::operators::{
    antihermitian_defect, assemble_density_generator, assemble_half_density_generator,
    assemble_multiplication_operator, VectorFieldSpec,
};
use halfdens::propagation::{conjugate_observable, propagator_for_scheme, SchemeSpec, SpectralPropagator};
use halfdens::scenarios::{
    convergence_study, run_abc, run_benchmark_s1, run_convergence, run_solve, Scenario, Solver, VectorFieldConfig,
};
use halfdens::solvers::{initial_half_density, solve_density_series, solve_density_standard_series};

// Tolerances and limits, one per criterion.
const C1_MASS_REL: f64 = 1e-10;
const C1_LIMIT: Duration = Duration::from_secs(10);
const C2_NEGATIVITY: f64 = 1e-12;
const C2_LIMIT: Duration = Duration::from_secs(10);
const C3_REL: f64 = 1e-3;
const C3_LIMIT: Duration = Duration::from_secs(10);
const C4_SLOPE: f64 = -4.0;
const C4_LIMIT: Duration = Duration::from_secs(60);
const C5_TIME_TOL: f64 = 1e-8;
const C5_DISCREPANCY: f64 = 1e-7;
const C5_RATIO: f64 = 10.0;
const C5_LIMIT: Duration = Duration::from_secs(30);
const C6_SPECTRUM: f64 = 1e-9;
const C6_LIMIT: Duration = Duration::from_secs(30);
const C7_PAIRING: f64 = 1e-9;
const C7_LIMIT: Duration = Duration::from_secs(10);
const C8_ANTIHERMITIAN: f64 = 1e-13;
const C8_UNITARITY: f64 = 1e-10;
const C8_ENTRIES: f64 = 1e-10;
const C8_LIMIT: Duration = Duration::from_secs(5);
const C9_ENTRIES: f64 = 1e-12;
const C9_LIMIT: Duration = Duration::from_secs(5);
const C10_MASS: f64 = 1e-8;
const C10_NEGATIVITY: f64 = 1e-10;
const C10_MARGINAL: f64 = 0.1;
const C10_LIMIT: Duration = Duration::from_secs(300);

const K_BENCH: usize = 16;
const T_BENCH: f64 = 1.5;
const SNAPSHOTS: usize = 30;

fn verdict(n: u32, name: &str, ok: bool, detail: String) {
    println!("criterion {n:>2} {name}: {} | {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {n} ({name}) failed: {detail}");
}

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let e = start.elapsed();
    (e < limit, format!("runtime {:.2}s (limit {}s)", e.as_secs_f64(), limit.as_secs()))
}

fn bench_field() -> VectorFieldSpec {
    VectorFieldSpec::zero(vec![TAU]).with_sin(0, &[2], -1.0)
}

fn bench_trunc(k: usize) -> TruncationSpec {
    TruncationSpec::uniform(1, k, TAU).unwrap()
}

fn uniform(trunc: &TruncationSpec) -> GridField {
    GridField::from_real_fn(vec![TAU], trunc.default_grid(), |_| 1.0).unwrap()
}

fn snapshot_times() -> Vec<f64> {
    (0..=SNAPSHOTS).map(|i| T_BENCH * i as f64 / SNAPSHOTS as f64).collect()
}

fn trig_coeffs(f: fn(f64) -> f64) -> SpectralField {
    let t1 = bench_trunc(1);
    analyze(&GridField::from_real_fn(vec![TAU], t1.default_grid(), |x| f(x[0])).unwrap(), &t1).unwrap()
}

#[test]
fn criterion_01_mass_conservation() {
    let start = Instant::now();
    let trunc = bench_trunc(K_BENCH);
    let times = snapshot_times();
    let spec = SchemeSpec::dense_expm();
    let alg2 = solve_density_series(&uniform(&trunc), &bench_field(), &times, &trunc, &spec).unwrap();
    let std = solve_density_standard_series(&uniform(&trunc), &bench_field(), &times, &trunc, &spec).unwrap();
    let m0 = alg2[0].mass_spectral;
    let mass_rel = alg2.iter().map(|r| (r.mass_spectral - m0).abs() / m0).fold(0.0, f64::max);
    let l1: Vec<f64> = std
        .iter()
        .map(|g| g.samples.iter().map(|v| v.norm()).sum::<f64>() * g.cell_measure())
        .collect();
    let drift: Vec<f64> = l1.iter().map(|v| (v - l1[0]).abs()).collect();
    let max_drift = drift.iter().copied().fold(0.0, f64::max);
    let (fast, rt) = within(start, C1_LIMIT);
    let ok = mass_rel <= C1_MASS_REL && max_drift > 0.0 && fast;
    verdict(
        1,
        "mass conservation",
        ok,
        format!(
            "alg2 max relative mass drift {mass_rel:.2e} (tol {C1_MASS_REL:e}); standard L1 drift at t = 0.5, 1.0, 1.5: {:.3e}, {:.3e}, {:.3e} (max {max_drift:.3e} > 0); {rt}",
            drift[10], drift[20], drift[30]
        ),
    );
}

#[test]
fn criterion_02_positivity() {
    let start = Instant::now();
    let trunc = bench_trunc(K_BENCH);
    let times = snapshot_times();
    let spec = SchemeSpec::dense_expm();
    let alg2 = solve_density_series(&uniform(&trunc), &bench_field(), &times, &trunc, &spec).unwrap();
    let worst = alg2.iter().map(|r| negativity(&r.rho)).fold(0.0, f64::max);
    let std = solve_density_standard_series(&uniform(&trunc), &bench_field(), &[T_BENCH], &trunc, &spec).unwrap();
    let std_neg = negativity(&std[0]);
    let (fast, rt) = within(start, C2_LIMIT);
    let ok = worst <= C2_NEGATIVITY && std_neg > 0.0 && fast;
    verdict(
        2,
        "positivity",
        ok,
        format!("alg2 max negativity {worst:.2e} (tol {C2_NEGATIVITY:e}); standard negativity at K=16, t=1.5: {std_neg:.3e} (> 0); {rt}"),
    );
}

#[test]
fn criterion_03_pointwise_oracle() {
    let start = Instant::now();
    let trunc = bench_trunc(K_BENCH);
    let spec = SchemeSpec::dense_expm();
    let res = solve_density_series(&uniform(&trunc), &bench_field(), &[T_BENCH], &trunc, &spec).unwrap();
    // 0 and π/2 are nodes of the 4(K+1) grid; ρ_N = ψ_N² sampled there.
    let psi = synthesize(&res[0].psi, &[4 * (K_BENCH + 1)]).unwrap();
    let at = |x: f64| {
        let j = (x / TAU * psi.len() as f64).round() as usize;
        assert!((psi.node(j)[0] - x).abs() < 1e-12);
        (psi.samples[j] * psi.samples[j]).re
    };
    let (r0, r1) = (at(0.0), at(FRAC_PI_2));
    let (e0, e1) = ((2.0 * T_BENCH).exp(), (-2.0 * T_BENCH).exp());
    let (rel0, rel1) = ((r0 - e0).abs() / e0, (r1 - e1).abs() / e1);
    let (fast, rt) = within(start, C3_LIMIT);
    let ok = rel0 <= C3_REL && rel1 <= C3_REL && fast;
    verdict(
        3,
        "pointwise oracle accuracy",
        ok,
        format!(
            "rho_N(0) = {r0:.6} vs e^3 = {e0:.6} (rel {rel0:.2e}); rho_N(pi/2) = {r1:.6} vs e^-3 = {e1:.6} (rel {rel1:.2e}); tol {C3_REL:e}; {rt}"
        ),
    );
}

#[test]
fn criterion_04_spectral_convergence() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut scn = Scenario::benchmark_s1(dir.path());
    scn.convergence_modes = vec![4, 8, 12, 16];
    scn.convergence_time = 1.0;
    scn.solvers = vec![Solver::Alg2, Solver::Standard];
    let study = convergence_study(&scn).unwrap();
    let last = study.rows.last().unwrap();
    let std16 = last.standard_error.unwrap();
    let errs: Vec<String> = study.rows.iter().map(|r| format!("K={}: {:.3e}", r.modes, r.alg2_error)).collect();
    let (fast, rt) = within(start, C4_LIMIT);
    let ok = study.alg2_slope <= C4_SLOPE && last.alg2_error <= std16 && fast;
    verdict(
        4,
        "spectral convergence",
        ok,
        format!(
            "alg2 L1 errors [{}], slope {:.3} (need <= {C4_SLOPE}); K=16 alg2 {:.3e} <= standard {std16:.3e}: {}; {rt}",
            errs.join(", "),
            study.alg2_slope,
            last.alg2_error,
            last.alg2_error <= std16
        ),
    );
}

#[test]
fn criterion_05_algebra_preservation() {
    let start = Instant::now();
    let trunc = bench_trunc(K_BENCH);
    let spec = SchemeSpec::krylov(C5_TIME_TOL);
    let (f, g) = (trig_coeffs(f64::sin), trig_coeffs(f64::cos));
    let dh = product_discrepancy(&f, &g, &bench_field(), 1.0, &trunc, &spec, ProductMethod::HalfDensity).unwrap();
    let ds = product_discrepancy(&f, &g, &bench_field(), 1.0, &trunc, &spec, ProductMethod::Standard).unwrap();
    let (fast, rt) = within(start, C5_LIMIT);
    let ok = dh <= C5_DISCREPANCY && ds >= C5_RATIO * dh && fast;
    verdict(
        5,
        "algebra preservation",
        ok,
        format!("operator discrepancy {dh:.2e} (tol {C5_DISCREPANCY:e}); standard {ds:.3e} (ratio {:.1e} >= {C5_RATIO}); {rt}", ds / dh),
    );
}

#[test]
fn criterion_06_isospectrality() {
    let start = Instant::now();
    let trunc = bench_trunc(K_BENCH);
    let spec = SchemeSpec::dense_expm();
    let hf = assemble_multiplication_operator(&trig_coeffs(f64::sin), &trunc).unwrap();
    let ev0 = hf.eigenvalues();
    let norm0 = operator_norm(&hf).unwrap();
    let gen = assemble_half_density_generator(&bench_field(), &trunc).unwrap();
    let mut worst: f64 = 0.0;
    let mut norm_drift: f64 = 0.0;
    for t in [0.5, 1.0, 1.5] {
        let h = conjugate_observable(&propagator_for_scheme(&gen, t, &spec).unwrap(), &hf).unwrap();
        let ev = h.eigenvalues();
        worst = ev.iter().zip(&ev0).map(|(a, b)| (a - b).abs()).fold(worst, f64::max);
        norm_drift = norm_drift.max((operator_norm(&h).unwrap() - norm0).abs());
    }
    let (fast, rt) = within(start, C6_LIMIT);
    let ok = worst <= C6_SPECTRUM && norm_drift <= C6_SPECTRUM && fast;
    verdict(
        6,
        "isospectrality and sup-norm",
        ok,
        format!("max eigenvalue drift {worst:.2e}, operator norm drift {norm_drift:.2e} (tol {C6_SPECTRUM:e}); {rt}"),
    );
}

#[test]
fn criterion_07_duality_pairing() {
    let start = Instant::now();
    let trunc = bench_trunc(K_BENCH);
    let spec = SchemeSpec::dense_expm();
    let times = snapshot_times();
    let psi0 = initial_half_density(&uniform(&trunc), &trunc).unwrap();
    let hf = assemble_multiplication_operator(&trig_coeffs(f64::sin), &trunc).unwrap();
    let p0 = pairing(&hf, &psi0).unwrap();
    let gen = assemble_half_density_generator(&bench_field(), &trunc).unwrap();
    let res = solve_density_series(&uniform(&trunc), &bench_field(), &times, &trunc, &spec).unwrap();
    let mut worst: f64 = 0.0;
    for (t, r) in times.iter().zip(&res) {
        let h = conjugate_observable(&propagator_for_scheme(&gen, *t, &spec).unwrap(), &hf).unwrap();
        worst = worst.max((pairing(&h, &r.psi).unwrap() - p0).norm());
    }
    let (fast, rt) = within(start, C7_LIMIT);
    let ok = worst <= C7_PAIRING && fast;
    verdict(
        7,
        "duality pairing",
        ok,
        format!("initial pairing {:.6e}, max drift {worst:.2e} over {} snapshots (tol {C7_PAIRING:e}); {rt}", p0.re, times.len()),
    );
}

/// `⟨e_r, L e_c⟩` for `L e = X e' + ½ X' e` by trapezoid quadrature on the
/// circle, with `X = -sin 2x`.
fn quadrature_entry(r: i64, c: i64) -> Complex64 {
    let m = 512;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..m {
        let x = TAU * j as f64 / m as f64;
        let x_val = -(2.0 * x).sin();
        let dx_val = -2.0 * (2.0 * x).cos();
        let ec = Complex64::from_polar(1.0 / TAU.sqrt(), c as f64 * x);
        let er = Complex64::from_polar(1.0 / TAU.sqrt(), r as f64 * x);
        let lec = ec * (Complex64::new(0.0, c as f64) * x_val + 0.5 * dx_val);
        acc += er.conj() * lec;
    }
    acc * (TAU / m as f64)
}

#[test]
fn criterion_08_structural_checks() {
    let start = Instant::now();
    let mut generators = Vec::new();
    for k in [4, 8, 16] {
        generators.push((format!("s1 K={k}"), assemble_half_density_generator(&bench_field(), &bench_trunc(k)).unwrap()));
    }
    for (name, cfg) in [
        ("abc_modified", VectorFieldConfig::AbcModified { a: 1.0, b: 0.5, c: 0.2, d: 0.5 }),
        ("abc_printed", VectorFieldConfig::AbcPrinted { a: 1.0, b: 0.5, c: 0.2, d: 0.5 }),
    ] {
        let vf = cfg.build(&[1.0; 3]).unwrap();
        for k in [2, 4] {
            let t = TruncationSpec::uniform(3, k, 1.0).unwrap();
            generators.push((format!("{name} K={k}"), assemble_half_density_generator(&vf, &t).unwrap()));
        }
    }
    let ah = generators.iter().map(|(_, g)| antihermitian_defect(g)).fold(0.0, f64::max);
    let mut unit: f64 = 0.0;
    // Dense propagators for every generator up to 125 modes (all s1 ones and
    // the K=2 ABC ones).
    let mut dense = 0;
    for (_, g) in generators.iter().filter(|(_, g)| g.len() <= 125) {
        dense += 1;
        let sp = SpectralPropagator::new(g, 4096).unwrap();
        for t in [0.5, 1.5] {
            unit = unit.max(sp.propagator(t).unitarity_defect());
        }
    }

    let trunc = bench_trunc(K_BENCH);
    let gen = &generators[2].1;
    let offsets: Vec<i64> = gen.offsets().iter().map(|p| p.0[0]).collect();
    let k = K_BENCH as i64;
    let mut entry_err: f64 = 0.0;
    let mut oracle_err: f64 = 0.0;
    for r in -k..=k {
        for c in -k..=k {
            let (ri, ci) = (trunc.flat_index(&[r]).unwrap(), trunc.flat_index(&[c]).unwrap());
            let closed = match r - c {
                2 => -(c as f64 + 1.0) / 2.0,
                -2 => (c as f64 - 1.0) / 2.0,
                _ => 0.0,
            };
            let e = gen.entry(ri, ci);
            entry_err = entry_err.max((e - Complex64::new(closed, 0.0)).norm());
            oracle_err = oracle_err.max((e - quadrature_entry(r, c)).norm());
        }
    }
    let (fast, rt) = within(start, C8_LIMIT);
    let ok = ah <= C8_ANTIHERMITIAN
        && unit <= C8_UNITARITY
        && offsets == vec![-2, 2]
        && entry_err <= C8_ENTRIES
        && oracle_err <= C8_ENTRIES
        && fast;
    verdict(
        8,
        "structural checks",
        ok,
        format!(
            "{} generators: anti-Hermitian defect {ah:.1e} (tol {C8_ANTIHERMITIAN:e}); {dense} propagators at t = 0.5, 1.5: unitarity defect {unit:.1e} (tol {C8_UNITARITY:e}); s1 offsets {offsets:?}; entry error vs closed form {entry_err:.1e}, vs quadrature {oracle_err:.1e} (tol {C8_ENTRIES:e}); {rt}",
            generators.len()
        ),
    );
}

#[test]
fn criterion_09_divergence_free_degeneracy() {
    let start = Instant::now();
    let vf = VectorFieldConfig::AbcModified { a: 1.0, b: 0.5, c: 0.2, d: 0.0 }.build(&[1.0; 3]).unwrap();
    let t = TruncationSpec::uniform(3, 4, 1.0).unwrap();
    let half = assemble_half_density_generator(&vf, &t).unwrap();
    let dens = assemble_density_generator(&vf, &t).unwrap();
    // Half-density stores X_N with ż = -X_N z; density stores G with ρ̇ = G ρ.
    let diff = half.max_entry_difference(&dens, 1.0).unwrap();
    let (fast, rt) = within(start, C9_LIMIT);
    let ok = diff <= C9_ENTRIES && fast;
    verdict(
        9,
        "divergence-free degeneracy",
        ok,
        format!("D=0, K=4: max |X_half + G_density| = {diff:.1e} over {} modes (tol {C9_ENTRIES:e}); {rt}", t.len()),
    );
}

#[test]
fn criterion_10_abc_desk_scale() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut scn = Scenario::abc(dir.path());
    scn.vector_field = VectorFieldConfig::AbcModified { a: 1.0, b: 0.5, c: 0.2, d: 0.5 };
    scn.modes = 8;
    scn.t_final = 0.5;
    scn.particles = 20000;
    scn.solvers = vec![Solver::Alg2, Solver::Particles];
    let rep = run_abc(&scn).unwrap();
    let cons = &rep.tables["conservation"];
    let mass = cons.column("alg2_nuclear_mass").unwrap();
    let mass_drift = mass.iter().map(|m| (m - mass[0]).abs()).fold(0.0, f64::max);
    let neg = cons.column("alg2_negativity").unwrap().into_iter().fold(0.0, f64::max);
    let dist = *cons.column("marginal_l1_alg2_particles").unwrap().last().unwrap();
    let (fast, rt) = within(start, C10_LIMIT);
    let ok = mass_drift <= C10_MASS && neg <= C10_NEGATIVITY && dist <= C10_MARGINAL && fast;
    verdict(
        10,
        "ABC desk-scale run",
        ok,
        format!(
            "mass {:.12} drift {mass_drift:.1e} (tol {C10_MASS:e}); negativity {neg:.1e} (tol {C10_NEGATIVITY:e}); z-marginal L1 vs {} particles at t=0.5: {dist:.4} (tol {C10_MARGINAL}); {rt}",
            mass[0], scn.particles
        ),
    );
}

fn snapshot_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn criterion_11_determinism() {
    let root = tempfile::tempdir().unwrap();
    let mut bench = Scenario::benchmark_s1(root.path().join("bench"));
    bench.convergence_modes = vec![4, 8, 12, 16];
    let mut abc = Scenario::abc(root.path().join("abc"));
    abc.modes = 4;
    abc.particles = 3000;
    abc.t_final = 0.25;
    abc.n_snapshots = 2;
    abc.solvers = vec![Solver::Alg2, Solver::Standard, Solver::Particles];
    let mut solve = Scenario::abc(root.path().join("solve"));
    solve.modes = 3;
    solve.particles = 500;
    solve.t_final = 0.1;
    solve.n_snapshots = 1;
    let mut conv = Scenario::benchmark_s1(root.path().join("conv"));
    conv.output.format = halfdens::scenarios::OutputFormat::Json;

    type Runner = fn(&Scenario) -> halfdens::Result<halfdens::scenarios::RunReport>;
    let runs: [(&str, &Scenario, Runner); 4] = [
        ("bench-s1", &bench, run_benchmark_s1),
        ("abc", &abc, run_abc),
        ("solve", &solve, run_solve),
        ("convergence", &conv, run_convergence),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, scn, run) in runs {
        run(scn).unwrap();
        let first = snapshot_dir(&scn.output.dir);
        run(scn).unwrap();
        let second = snapshot_dir(&scn.output.dir);
        let same = first == second;
        ok &= same && first.len() >= 2;
        lines.push(format!("{name}: {} files {}", first.len(), if same { "identical" } else { "DIFFER" }));
    }
    verdict(11, "determinism", ok, lines.join("; "));
}
