// Functions as multiplication operators: the spectrum of H_f(t) stays put
// and products commute with the evolution.

use std::f64::consts::TAU;

use halfdens::basis::{analyze, GridField, TruncationSpec};
use halfdens::diagnostics::{product_discrepancy, ProductMethod};
use halfdens::operators::{assemble_multiplication_operator, VectorFieldSpec};
use halfdens::propagation::SchemeSpec;
use halfdens::solvers::solve_observable;

pub fn run_example() -> halfdens::Result<()> {
    let vf = VectorFieldSpec::zero(vec![TAU]).with_sin(0, &[2], -1.0);
    let trunc = TruncationSpec::uniform(1, 16, TAU)?;
    let t1 = TruncationSpec::uniform(1, 1, TAU)?;
    let f = analyze(&GridField::from_real_fn(vec![TAU], t1.default_grid(), |x| x[0].sin())?, &t1)?;
    let g = analyze(&GridField::from_real_fn(vec![TAU], t1.default_grid(), |x| x[0].cos())?, &t1)?;
    let spec = SchemeSpec::dense_expm();

    let ev0 = assemble_multiplication_operator(&f, &trunc)?.eigenvalues();
    for t in [0.5, 1.0, 1.5] {
        let ev = solve_observable(&f, &vf, t, &trunc, &spec)?.eigenvalues();
        let drift = ev.iter().zip(&ev0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dh = product_discrepancy(&f, &g, &vf, t, &trunc, &spec, ProductMethod::HalfDensity)?;
        let ds = product_discrepancy(&f, &g, &vf, t, &trunc, &spec, ProductMethod::Standard)?;
        println!("t = {t}: spectrum drift {drift:.1e}, product discrepancy operator {dh:.1e} vs standard {ds:.3e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
