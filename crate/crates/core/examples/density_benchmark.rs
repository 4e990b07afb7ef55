// Densities on the circle: half-density solver, standard Galerkin and the
// exact solution of x' = -sin 2x from a uniform start.

use std::f64::consts::TAU;

use halfdens::basis::{GridField, TruncationSpec};
use halfdens::diagnostics::{l1_distance, l1_norm_grid, negativity};
use halfdens::operators::VectorFieldSpec;
use halfdens::propagation::SchemeSpec;
use halfdens::scenarios::exact_s1_density;
use halfdens::solvers::{solve_density, solve_density_standard};

pub fn run_example() -> halfdens::Result<()> {
    let vf = VectorFieldSpec::zero(vec![TAU]).with_sin(0, &[2], -1.0);
    let spec = SchemeSpec::dense_expm();
    let t = 1.0;
    println!("{:>3} {:>10} {:>10} {:>12} {:>12}", "K", "alg2 err", "std err", "alg2 neg", "std neg");
    for k in [8, 16, 32] {
        let trunc = TruncationSpec::uniform(1, k, TAU)?;
        let rho0 = GridField::from_real_fn(vec![TAU], trunc.default_grid(), |_| 1.0)?;
        let exact = GridField::from_real_fn(vec![TAU], trunc.default_grid(), |x| exact_s1_density(x[0], t))?;
        let alg2 = solve_density(&rho0, &vf, t, &trunc, &spec)?;
        let std = solve_density_standard(&rho0, &vf, t, &trunc, &spec)?;
        println!(
            "{k:>3} {:>10.4} {:>10.4} {:>12.2e} {:>12.2e}",
            l1_distance(&alg2.rho, &exact)?,
            l1_distance(&std, &exact)?,
            negativity(&alg2.rho),
            negativity(&std)
        );
        println!("    mass: alg2 {:.12}, standard L1 {:.6}", alg2.mass_spectral, l1_norm_grid(&std));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
