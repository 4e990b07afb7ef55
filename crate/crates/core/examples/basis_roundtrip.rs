// Project a smooth function onto the Fourier basis and back.

use std::f64::consts::TAU;

use halfdens::basis::{analyze, sobolev_norm, synthesize, GridField, TruncationSpec};

pub fn run_example() -> halfdens::Result<()> {
    let trunc = TruncationSpec::uniform(1, 16, TAU)?;
    let f = |x: &[f64]| (x[0].sin()).exp();
    let grid = GridField::from_real_fn(vec![TAU], trunc.default_grid(), f)?;
    let coeffs = analyze(&grid, &trunc)?;
    let back = synthesize(&coeffs, &[256])?;
    let worst = (0..back.len())
        .map(|j| (back.samples[j].re - f(&back.node(j))).abs())
        .fold(0.0, f64::max);
    println!("K = 16, modes = {}", trunc.len());
    println!("max error on a 256-point grid: {worst:.3e}");
    println!("H^1 norm: {:.6}", sobolev_norm(&coeffs, 1.0)?);
    assert!(worst < 1e-12);
    Ok(())
}

#[allow(dead_code)]
fn main() -> halfdens::Result<()> {
    run_example()
}
