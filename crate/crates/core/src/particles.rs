//! Monte-Carlo particle advection along characteristics.
//!
//! Particle `i` draws its initial position from its own ChaCha8 stream
//! (`seed`, stream `i`), so sampling and advection are reproducible bit for
//! bit whatever the thread count.

use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::basis::{fmt_f64, GridField};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    pub periods: Vec<f64>,
    /// Row-major `count × dim` coordinates, each in `[0, L_i)`.
    pub positions: Vec<f64>,
    pub seed: u64,
}

impl ParticleEnsemble {
    pub fn new(periods: Vec<f64>, positions: Vec<f64>, seed: u64) -> Result<Self> {
        let dim = periods.len();
        if dim == 0 || positions.is_empty() || !positions.len().is_multiple_of(dim) {
            return Err(Error::InvalidArgument(format!(
                "{} coordinates for dimension {dim}",
                positions.len()
            )));
        }
        let positions = positions
            .chunks(dim)
            .flat_map(|p| p.iter().zip(&periods).map(|(&x, &l)| wrap(x, l)))
            .collect();
        Ok(Self {
            periods,
            positions,
            seed,
        })
    }

    pub fn dim(&self) -> usize {
        self.periods.len()
    }

    pub fn count(&self) -> usize {
        self.positions.len() / self.dim()
    }

    pub fn position(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.positions[i * d..(i + 1) * d]
    }

    /// One row per particle: `x1,…,xn`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let header: Vec<String> = (1..=self.dim()).map(|a| format!("x{a}")).collect();
        wtr.write_record(&header)?;
        for p in self.positions.chunks(self.dim()) {
            wtr.write_record(p.iter().map(|v| fmt_f64(*v)))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

pub(crate) fn wrap(x: f64, period: f64) -> f64 {
    let r = x.rem_euclid(period);
    // rem_euclid can round up to the period itself for tiny negative x.
    if r >= period {
        0.0
    } else {
        r
    }
}

/// Independent Gaussian draws per axis, reduced modulo the periods.
pub fn sample_wrapped_gaussian(
    mean: &[f64],
    sigma: &[f64],
    periods: &[f64],
    count: usize,
    seed: u64,
) -> Result<ParticleEnsemble> {
    let dim = periods.len();
    if mean.len() != dim || sigma.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "mean/sigma of length {}/{} on a {dim}-torus",
            mean.len(),
            sigma.len()
        )));
    }
    if let Some(s) = sigma.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
        return Err(Error::InvalidArgument(format!("sigma {s} must be positive")));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("particle count must be positive".into()));
    }
    let mut positions = vec![0.0; count * dim];
    positions
        .par_chunks_mut(dim)
        .enumerate()
        .for_each(|(i, p)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            for a in 0..dim {
                let z: f64 = rng.sample(StandardNormal);
                p[a] = wrap(mean[a] + sigma[a] * z, periods[a]);
            }
        });
    Ok(ParticleEnsemble {
        periods: periods.to_vec(),
        positions,
        seed,
    })
}

/// RK4 integration of `ẋ = X(x)` for every particle over time `t` with step
/// at most `dt`; positions are wrapped back onto the torus at the end.
pub fn advect_particles<F>(
    ens: &ParticleEnsemble,
    field: F,
    t: f64,
    dt: f64,
) -> Result<ParticleEnsemble>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("step size {dt} must be positive")));
    }
    if !t.is_finite() {
        return Err(Error::NonFinite(format!("time {t}")));
    }
    let dim = ens.dim();
    let steps = (t.abs() / dt).ceil() as usize;
    let h = if steps == 0 { 0.0 } else { t / steps as f64 };
    let mut positions = ens.positions.clone();
    positions.par_chunks_mut(dim).try_for_each(|p| {
        let mut k = [vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]];
        let mut tmp = vec![0.0; dim];
        for _ in 0..steps {
            field(p, &mut k[0]);
            for a in 0..dim {
                tmp[a] = p[a] + 0.5 * h * k[0][a];
            }
            field(&tmp, &mut k[1]);
            for a in 0..dim {
                tmp[a] = p[a] + 0.5 * h * k[1][a];
            }
            field(&tmp, &mut k[2]);
            for a in 0..dim {
                tmp[a] = p[a] + h * k[2][a];
            }
            field(&tmp, &mut k[3]);
            for a in 0..dim {
                p[a] += h / 6.0 * (k[0][a] + 2.0 * k[1][a] + 2.0 * k[2][a] + k[3][a]);
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("vector field produced a non-finite value".into()));
            }
        }
        for (x, &l) in p.iter_mut().zip(&ens.periods) {
            *x = wrap(*x, l);
        }
        Ok(())
    })?;
    Ok(ParticleEnsemble {
        periods: ens.periods.clone(),
        positions,
        seed: ens.seed,
    })
}

/// Normalized histogram over the listed axes, `bins` per axis. Node `j` of
/// the returned grid stands for the cell `[x_j, x_j + L/bins)`, and the
/// values are densities: their sum times the cell measure is 1.
pub fn histogram_marginal(
    ens: &ParticleEnsemble,
    axes: &[usize],
    bins: usize,
) -> Result<GridField> {
    if axes.is_empty() {
        return Err(Error::InvalidArgument("empty axis subset".into()));
    }
    if bins == 0 {
        return Err(Error::InvalidArgument("need at least one bin".into()));
    }
    if let Some(a) = axes.iter().find(|&&a| a >= ens.dim()) {
        return Err(Error::InvalidArgument(format!("axis {a} out of range")));
    }
    let periods: Vec<f64> = axes.iter().map(|&a| ens.periods[a]).collect();
    let sizes = vec![bins; axes.len()];
    let cells: usize = sizes.iter().product();
    let mut counts = vec![0u64; cells];
    for p in ens.positions.chunks(ens.dim()) {
        let mut flat = 0usize;
        for (&a, &l) in axes.iter().zip(&periods) {
            let b = ((p[a] / l) * bins as f64).floor() as usize;
            flat = flat * bins + b.min(bins - 1);
        }
        counts[flat] += 1;
    }
    let measure: f64 = periods.iter().map(|l| l / bins as f64).product();
    let norm = 1.0 / (ens.count() as f64 * measure);
    GridField::new(
        periods,
        sizes,
        counts
            .into_iter()
            .map(|c| Complex64::new(c as f64 * norm, 0.0))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circular_mean(xs: impl Iterator<Item = f64>, l: f64) -> f64 {
        let (mut s, mut c) = (0.0, 0.0);
        for x in xs {
            let th = 2.0 * PI * x / l;
            s += th.sin();
            c += th.cos();
        }
        s.atan2(c) * l / (2.0 * PI)
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let a = sample_wrapped_gaussian(&[0.1, 0.2], &[0.3, 0.4], &[1.0, 1.0], 500, 42).unwrap();
        let b = sample_wrapped_gaussian(&[0.1, 0.2], &[0.3, 0.4], &[1.0, 1.0], 500, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_wrapped_gaussian(&[0.1, 0.2], &[0.3, 0.4], &[1.0, 1.0], 500, 43).unwrap();
        assert_ne!(a.positions, c.positions);
        assert!(a.positions.iter().all(|&x| (0.0..1.0).contains(&x)));
    }

    #[test]
    fn tiny_sigma_collapses_to_mean() {
        let ens = sample_wrapped_gaussian(&[0.0, 0.25], &[1e-9, 1e-9], &[1.0, 1.0], 100, 1).unwrap();
        for i in 0..ens.count() {
            let p = ens.position(i);
            let d0 = p[0].min(1.0 - p[0]);
            assert!(d0 < 1e-8);
            assert!((p[1] - 0.25).abs() < 1e-8);
        }
    }

    #[test]
    fn gaussian_sample_statistics() {
        let ens = sample_wrapped_gaussian(&[0.0; 3], &[0.2, 0.3, 0.3], &[1.0; 3], 3375, 2024).unwrap();
        for a in 0..3 {
            let m = circular_mean((0..ens.count()).map(|i| ens.position(i)[a]), 1.0);
            assert!(m.abs() < 0.02, "axis {a}: {m}");
        }
    }

    #[test]
    fn invalid_sampling_arguments() {
        assert!(sample_wrapped_gaussian(&[0.0], &[0.0], &[1.0], 10, 0).is_err());
        assert!(sample_wrapped_gaussian(&[0.0], &[0.1], &[1.0], 0, 0).is_err());
        assert!(sample_wrapped_gaussian(&[0.0, 0.0], &[0.1], &[1.0], 10, 0).is_err());
    }

    #[test]
    fn advection_zero_and_constant_fields() {
        let l = 2.0 * PI;
        let ens = sample_wrapped_gaussian(&[1.0], &[0.5], &[l], 200, 5).unwrap();
        let still = advect_particles(&ens, |_, o| o[0] = 0.0, 3.0, 0.01).unwrap();
        assert_eq!(still.positions, ens.positions);
        let c = 0.9;
        let t = 2.3;
        let moved = advect_particles(&ens, |_, o| o[0] = c, t, 0.01).unwrap();
        for (a, b) in ens.positions.iter().zip(&moved.positions) {
            let expect = wrap(a + c * t, l);
            let d = (b - expect).abs();
            assert!(d.min(l - d) <= 1e-12);
        }
        assert!(advect_particles(&ens, |_, o| o[0] = 1.0, 1.0, 0.0).is_err());
        assert!(advect_particles(&ens, |_, o| o[0] = f64::NAN, 1.0, 0.1).is_err());
    }

    #[test]
    fn histogram_properties() {
        let ens = ParticleEnsemble::new(vec![1.0, 2.0], vec![0.1, 0.1, 0.12, 0.15, 0.13, 0.19], 0).unwrap();
        let h = histogram_marginal(&ens, &[0], 10).unwrap();
        assert!((h.samples[1].re * 0.1 - 1.0).abs() < 1e-15);
        let total: f64 = h.samples.iter().map(|v| v.re).sum::<f64>() * h.cell_measure();
        assert!((total - 1.0).abs() < 1e-15);
        assert!(histogram_marginal(&ens, &[], 10).is_err());
        assert!(histogram_marginal(&ens, &[0], 0).is_err());

        let uni = ParticleEnsemble::new(
            vec![1.0],
            {
                let mut rng = ChaCha8Rng::seed_from_u64(9);
                (0..40000).map(|_| rng.random::<f64>()).collect()
            },
            9,
        )
        .unwrap();
        let bins = 20;
        let h = histogram_marginal(&uni, &[0], bins).unwrap();
        let per_bin = 40000.0 / bins as f64;
        let bound = 5.0 / per_bin.sqrt();
        for v in &h.samples {
            assert!((v.re - 1.0).abs() <= bound);
        }
        let h2 = histogram_marginal(&ens, &[0, 1], 4).unwrap();
        let total: f64 = h2.samples.iter().map(|v| v.re).sum::<f64>() * h2.cell_measure();
        assert!((total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn csv_has_one_row_per_particle() {
        let ens = sample_wrapped_gaussian(&[0.0, 0.0], &[0.1, 0.1], &[1.0, 1.0], 7, 3).unwrap();
        let mut buf = Vec::new();
        ens.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 8);
    }
}
