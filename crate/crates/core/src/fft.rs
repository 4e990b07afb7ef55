//! Multi-dimensional complex DFTs over row-major buffers (first axis slowest).

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

/// In-place unnormalized DFT along every axis.
///
/// `Forward` computes `Σ_j x_j exp(-2πi kj/M)`, `Inverse` the same with `+`.
pub(crate) fn fft_nd(data: &mut [Complex64], sizes: &[usize], direction: FftDirection) {
    debug_assert_eq!(data.len(), sizes.iter().product::<usize>());
    let mut planner = FftPlanner::<f64>::new();
    for axis in 0..sizes.len() {
        let len = sizes[axis];
        if len <= 1 {
            continue;
        }
        let stride: usize = sizes[axis + 1..].iter().product();
        let outer: usize = sizes[..axis].iter().product();
        let fft = planner.plan_fft(len, direction);
        let mut line = vec![Complex64::new(0.0, 0.0); len];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * len * stride;
            for s in 0..stride {
                for (j, v) in line.iter_mut().enumerate() {
                    *v = data[base + j * stride + s];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (j, v) in line.iter().enumerate() {
                    data[base + j * stride + s] = *v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn matches_direct_dft_2d() {
        let sizes = [3usize, 4];
        let data: Vec<Complex64> = (0..12)
            .map(|i| Complex64::new(i as f64 * 0.3 - 1.0, (i * i) as f64 * 0.05))
            .collect();
        let mut out = data.clone();
        fft_nd(&mut out, &sizes, FftDirection::Forward);
        for k0 in 0..3 {
            for k1 in 0..4 {
                let mut acc = Complex64::new(0.0, 0.0);
                for j0 in 0..3 {
                    for j1 in 0..4 {
                        let phase = -2.0 * PI * ((k0 * j0) as f64 / 3.0 + (k1 * j1) as f64 / 4.0);
                        acc += data[j0 * 4 + j1] * Complex64::from_polar(1.0, phase);
                    }
                }
                assert!((acc - out[k0 * 4 + k1]).norm() < 1e-12);
            }
        }
    }
}
