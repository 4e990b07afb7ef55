// Seeded Monte-Carlo ensemble advected by RK4 and compared with the exact
// flow map of x' = -sin 2x.

use std::f64::consts::{PI, TAU};

use halfdens::operators::VectorFieldSpec;
use halfdens::particles::{advect_particles, histogram_marginal, sample_wrapped_gaussian};
use halfdens::scenarios::exact_s1_flow;

pub fn run_example() -> halfdens::Result<()> {
    let vf = VectorFieldSpec::zero(vec![TAU]).with_sin(0, &[2], -1.0);
    let field = vf.evaluator();
    let ens = sample_wrapped_gaussian(&[PI / 3.0], &[0.4], &[TAU], 2000, 7)?;
    let t = 1.0;
    let moved = advect_particles(&ens, |x, o| field.evaluate(x, o), t, 1e-2)?;
    let worst = (0..ens.count())
        .map(|i| {
            let d = (moved.position(i)[0] - exact_s1_flow(ens.position(i)[0], t)).abs();
            d.min(TAU - d)
        })
        .fold(0.0, f64::max);
    println!("max deviation from the exact flow: {worst:.2e}");
    let hist = histogram_marginal(&moved, &[0], 12)?;
    for (j, v) in hist.samples.iter().enumerate() {
        println!("bin {j:>2}: {:.3}", v.re);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
