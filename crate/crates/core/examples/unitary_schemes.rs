// Compare the four time integrators on a half-density generator.

use std::f64::consts::TAU;

use num_complex::Complex64;

use halfdens::basis::TruncationSpec;
use halfdens::operators::{assemble_half_density_generator, VectorFieldSpec};
use halfdens::propagation::{evolve_state, SchemeSpec};

pub fn run_example() -> halfdens::Result<()> {
    let vf = VectorFieldSpec::zero(vec![TAU]).with_sin(0, &[2], -1.0);
    let trunc = TruncationSpec::uniform(1, 12, TAU)?;
    let gen = assemble_half_density_generator(&vf, &trunc)?;
    let mut z0 = vec![Complex64::new(0.0, 0.0); trunc.len()];
    z0[trunc.len() / 2] = Complex64::new(1.0, 0.0);

    let reference = evolve_state(&gen, &z0, 1.0, &SchemeSpec::dense_expm())?;
    for spec in [
        SchemeSpec::dense_expm(),
        SchemeSpec::cayley(1e-2),
        SchemeSpec::krylov(1e-10),
        SchemeSpec::rk4(1e-2),
    ] {
        let z = evolve_state(&gen, &z0, 1.0, &spec)?;
        let norm: f64 = z.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let err = z.iter().zip(&reference).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        println!("{:?}: |1 - |z|| = {:.1e}, distance to expm = {:.1e}", spec.scheme, (1.0 - norm).abs(), err);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
