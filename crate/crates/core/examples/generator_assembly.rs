// Banded generators of x' = -sin 2x and their structure.

use std::f64::consts::TAU;

use halfdens::basis::TruncationSpec;
use halfdens::operators::{
    antihermitian_defect, assemble_density_generator, assemble_half_density_generator, VectorFieldSpec,
};
use halfdens::propagation::dense_propagator;

pub fn run_example() -> halfdens::Result<()> {
    let vf = VectorFieldSpec::zero(vec![TAU]).with_sin(0, &[2], -1.0);
    let trunc = TruncationSpec::uniform(1, 8, TAU)?;
    let half = assemble_half_density_generator(&vf, &trunc)?;
    let dens = assemble_density_generator(&vf, &trunc)?;

    let offsets: Vec<i64> = half.offsets().iter().map(|p| p.0[0]).collect();
    println!("offsets {offsets:?}, {} stored entries for {} modes", half.stored_entries(), half.len());
    println!("anti-Hermitian defect: {:.1e}", antihermitian_defect(&half));
    println!("density generator defect: {:.3}", antihermitian_defect(&dens));

    let u = dense_propagator(&half, 1.0)?;
    println!("unitarity defect of U(1): {:.1e}", u.unitarity_defect());

    let mut mm = Vec::new();
    half.write_matrix_market(&mut mm)?;
    println!("{}", String::from_utf8_lossy(&mm).lines().take(4).collect::<Vec<_>>().join("\n"));
    assert_eq!(offsets, vec![-2, 2]);
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
