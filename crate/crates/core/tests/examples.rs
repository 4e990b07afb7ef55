mod basis_roundtrip {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/basis_roundtrip.rs"));
}

#[test]
fn basis_roundtrip_runs() {
    basis_roundtrip::run_example().expect("basis_roundtrip example should run");
}

mod generator_assembly {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/generator_assembly.rs"));
}

#[test]
fn generator_assembly_runs() {
    generator_assembly::run_example().expect("generator_assembly example should run");
}

mod unitary_schemes {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/unitary_schemes.rs"));
}

#[test]
fn unitary_schemes_runs() {
    unitary_schemes::run_example().expect("unitary_schemes example should run");
}

mod density_benchmark {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/density_benchmark.rs"));
}

#[test]
fn density_benchmark_runs() {
    density_benchmark::run_example().expect("density_benchmark example should run");
}

mod observable_algebra {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/observable_algebra.rs"));
}

#[test]
fn observable_algebra_runs() {
    observable_algebra::run_example().expect("observable_algebra example should run");
}

mod particle_ensemble {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/particle_ensemble.rs"));
}

#[test]
fn particle_ensemble_runs() {
    particle_ensemble::run_example().expect("particle_ensemble example should run");
}

mod abc_flow {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/abc_flow.rs"));
}

#[test]
fn abc_flow_runs() {
    abc_flow::run_example().expect("abc_flow example should run");
}

mod scenario_file {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario_file.rs"));
}

#[test]
fn scenario_file_runs() {
    scenario_file::run_example().expect("scenario_file example should run");
}
