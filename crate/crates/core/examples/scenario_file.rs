// Drive a run from a JSON scenario, here a two-dimensional shear flow.

use halfdens::scenarios::{run_solve, Scenario};

const SCENARIO: &str = r#"{
  "name": "shear-2d",
  "dim": 2,
  "periods": [1.0, 1.0],
  "vector_field": {
    "preset": "trig",
    "terms": [
      {"component": 0, "kind": "sin", "wavevector": [0, 1], "amplitude": 0.5},
      {"component": 1, "kind": "cos", "wavevector": [1, 0], "amplitude": 0.3},
      {"component": 1, "kind": "constant", "amplitude": 0.1}
    ]
  },
  "initial": {"preset": "wrapped_gaussian", "mean": [0.5, 0.5], "sigma": [0.15, 0.2]},
  "modes": 6,
  "t_final": 0.5,
  "n_snapshots": 4,
  "scheme": {"scheme": "krylov", "tol": 1e-9},
  "solvers": ["alg2", "standard"],
  "output": {"dir": "out", "format": "csv"}
}"#;

pub fn run_example() -> halfdens::Result<()> {
    let dir = std::env::temp_dir().join("halfdens-scenario-example");
    let mut scn = Scenario::from_json(SCENARIO)?;
    scn.output.dir = dir;
    let report = run_solve(&scn)?;
    let cons = &report.tables["conservation"];
    println!("{}", cons.columns.join("  "));
    for row in &cons.rows {
        println!("{}", row.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join("  "));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
