// Small modified-ABC run: half-density solver against particles on the
// z-marginal. `cargo run --release --example abc_flow -- full` runs the
// desk-scale configuration.

use halfdens::scenarios::{run_abc, Scenario};

pub fn run_example() -> halfdens::Result<()> {
    let dir = std::env::temp_dir().join("halfdens-abc-example");
    let mut scn = Scenario::abc(&dir);
    if std::env::args().nth(1).as_deref() != Some("full") {
        scn.modes = 4;
        scn.particles = 4000;
        scn.particle_dt = 5e-3;
        scn.t_final = 0.2;
        scn.n_snapshots = 2;
        scn.marginal_bins = 16;
    }
    let report = run_abc(&scn)?;
    for (k, v) in &report.summary {
        println!("{k}: {v:.3e}");
    }
    println!("outputs in {}", report.dir.display());
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
