//! JSON scenario files.

use std::f64::consts::TAU;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::{GridField, TruncationSpec};
use crate::error::{Error, Result};
use crate::operators::VectorFieldSpec;
use crate::propagation::SchemeSpec;

/// Named vector fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum VectorFieldConfig {
    /// `ẋ = -sin 2x` on `[0, 2π)`.
    S1Benchmark,
    /// Classical ABC flow on the unit 3-torus plus a compressible term
    /// `D (cos 2πx, cos 2πy, cos 2πz)`.
    AbcModified {
        #[serde(default = "abc_a")]
        a: f64,
        #[serde(default = "abc_b")]
        b: f64,
        #[serde(default = "abc_c")]
        c: f64,
        #[serde(default = "abc_d")]
        d: f64,
    },
    /// The ABC variant with the `ẏ`, `ż` lines
    /// `B sin 2πz + A cos 2πy + D cos 2πy` and
    /// `A sin 2πz + B cos 2πy + D cos 2πz`.
    /// Not divergence free even at `D = 0`.
    AbcPrinted {
        #[serde(default = "abc_a")]
        a: f64,
        #[serde(default = "abc_b")]
        b: f64,
        #[serde(default = "abc_c")]
        c: f64,
        #[serde(default = "abc_d")]
        d: f64,
    },
    /// Sum of trigonometric terms, one list per component.
    Trig { terms: Vec<TrigTerm> },
}

fn abc_a() -> f64 {
    1.0
}
fn abc_b() -> f64 {
    0.5
}
fn abc_c() -> f64 {
    0.2
}
fn abc_d() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrigKind {
    Sin,
    Cos,
    Constant,
}

/// `amplitude · sin(Σ 2π p_i x_i / L_i)` (or `cos`, or a constant) added to
/// one component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub component: usize,
    pub kind: TrigKind,
    #[serde(default)]
    pub wavevector: Vec<i64>,
    pub amplitude: f64,
}

impl VectorFieldConfig {
    pub fn build(&self, periods: &[f64]) -> Result<VectorFieldSpec> {
        let dim = periods.len();
        let need = |d: usize, name: &str| -> Result<()> {
            if dim != d {
                return Err(Error::InvalidArgument(format!("preset {name} needs dim {d}, got {dim}")));
            }
            Ok(())
        };
        let unit = |p: [i64; 3]| p.to_vec();
        match *self {
            VectorFieldConfig::S1Benchmark => {
                need(1, "s1_benchmark")?;
                Ok(VectorFieldSpec::zero(periods.to_vec()).with_sin(0, &[2], -1.0))
            }
            VectorFieldConfig::AbcModified { a, b, c, d } => {
                need(3, "abc_modified")?;
                let (x, y, z) = (unit([1, 0, 0]), unit([0, 1, 0]), unit([0, 0, 1]));
                check_unit_periods(periods)?;
                Ok(VectorFieldSpec::zero(periods.to_vec())
                    .with_sin(0, &z, a)
                    .with_cos(0, &y, c)
                    .with_cos(0, &x, d)
                    .with_sin(1, &x, b)
                    .with_cos(1, &z, a)
                    .with_cos(1, &y, d)
                    .with_sin(2, &y, c)
                    .with_cos(2, &x, b)
                    .with_cos(2, &z, d))
            }
            VectorFieldConfig::AbcPrinted { a, b, c, d } => {
                need(3, "abc_printed")?;
                let (x, y, z) = (unit([1, 0, 0]), unit([0, 1, 0]), unit([0, 0, 1]));
                check_unit_periods(periods)?;
                Ok(VectorFieldSpec::zero(periods.to_vec())
                    .with_sin(0, &z, a)
                    .with_cos(0, &y, c)
                    .with_cos(0, &x, d)
                    .with_sin(1, &z, b)
                    .with_cos(1, &y, a + d)
                    .with_sin(2, &z, a)
                    .with_cos(2, &y, b)
                    .with_cos(2, &z, d))
            }
            VectorFieldConfig::Trig { ref terms } => {
                let mut vf = VectorFieldSpec::zero(periods.to_vec());
                for term in terms {
                    if term.component >= dim {
                        return Err(Error::InvalidArgument(format!(
                            "term component {} on a {dim}-torus",
                            term.component
                        )));
                    }
                    if term.kind != TrigKind::Constant && term.wavevector.len() != dim {
                        return Err(Error::DimensionMismatch(format!(
                            "wavevector {:?} on a {dim}-torus",
                            term.wavevector
                        )));
                    }
                    vf = match term.kind {
                        TrigKind::Sin => vf.with_sin(term.component, &term.wavevector, term.amplitude),
                        TrigKind::Cos => vf.with_cos(term.component, &term.wavevector, term.amplitude),
                        TrigKind::Constant => vf.with_constant(term.component, term.amplitude),
                    };
                }
                Ok(vf)
            }
        }
    }

    /// Compressibility parameter of the ABC presets.
    pub fn abc_d(&self) -> Option<f64> {
        match *self {
            VectorFieldConfig::AbcModified { d, .. } | VectorFieldConfig::AbcPrinted { d, .. } => Some(d),
            _ => None,
        }
    }
}

// ABC presets are written for period 1; other periods would silently change
// the field's meaning.
fn check_unit_periods(periods: &[f64]) -> Result<()> {
    if periods.iter().any(|&l| l != 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ABC presets live on the unit torus, got periods {periods:?}"
        )));
    }
    Ok(())
}

/// Initial density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "snake_case")]
pub enum InitialCondition {
    /// Constant density `value` (1 unless given).
    Uniform {
        #[serde(default = "one")]
        value: f64,
    },
    /// Product of 1-D Gaussians wrapped onto the torus, unit mass.
    WrappedGaussian { mean: Vec<f64>, sigma: Vec<f64> },
    /// Grid samples in the `x1,…,xn,re,im` CSV layout.
    File { path: PathBuf },
}

fn one() -> f64 {
    1.0
}

impl InitialCondition {
    /// Samples the density on the dealiased grid of `trunc` (file input is
    /// returned on its own grid).
    pub fn grid(&self, trunc: &TruncationSpec) -> Result<GridField> {
        let periods = trunc.periods().to_vec();
        let sizes = trunc.default_grid();
        match self {
            InitialCondition::Uniform { value } => {
                let v = *value;
                GridField::from_real_fn(periods, sizes, move |_| v)
            }
            InitialCondition::WrappedGaussian { mean, sigma } => {
                if mean.len() != periods.len() || sigma.len() != periods.len() {
                    return Err(Error::DimensionMismatch("wrapped Gaussian parameters".into()));
                }
                if sigma.iter().any(|s| !(*s > 0.0)) {
                    return Err(Error::InvalidArgument(format!("sigma {sigma:?} must be positive")));
                }
                let (mean, sigma, per) = (mean.clone(), sigma.clone(), periods.clone());
                GridField::from_real_fn(periods, sizes, move |x| {
                    (0..x.len()).map(|a| wrapped_gaussian_1d(x[a], mean[a], sigma[a], per[a])).product()
                })
            }
            InitialCondition::File { path } => {
                let f = File::open(path)?;
                GridField::read_csv(BufReader::new(f), periods)
            }
        }
    }
}

/// Density of `N(mean, σ²)` reduced modulo `period`.
pub fn wrapped_gaussian_1d(x: f64, mean: f64, sigma: f64, period: f64) -> f64 {
    let images = (8.0 * sigma / period).ceil() as i64 + 1;
    let norm = 1.0 / (sigma * TAU.sqrt());
    (-images..=images)
        .map(|n| {
            let d = x - mean + n as f64 * period;
            (-0.5 * (d / sigma).powi(2)).exp()
        })
        .sum::<f64>()
        * norm
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Density through the half-density.
    Alg2,
    /// Standard Galerkin on the density coefficients.
    Standard,
    /// Monte-Carlo particles.
    Particles,
    /// Functions as multiplication operators.
    Alg3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    #[serde(default)]
    pub format: OutputFormat,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub dim: usize,
    pub periods: Vec<f64>,
    pub vector_field: VectorFieldConfig,
    pub initial: InitialCondition,
    /// Truncation `K`, the same on every axis.
    pub modes: usize,
    pub t_final: f64,
    /// Output times are `i · t_final / n_snapshots` for `i = 0..=n_snapshots`.
    pub n_snapshots: usize,
    pub scheme: SchemeSpec,
    pub solvers: Vec<Solver>,
    #[serde(default = "default_particles")]
    pub particles: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_particle_dt")]
    pub particle_dt: f64,
    #[serde(default = "default_bins")]
    pub marginal_bins: usize,
    #[serde(default = "default_convergence_modes")]
    pub convergence_modes: Vec<usize>,
    #[serde(default = "default_convergence_time")]
    pub convergence_time: f64,
    /// Refuse runs with `K` above this.
    #[serde(default = "default_max_modes")]
    pub max_modes: usize,
    pub output: OutputConfig,
}

fn default_particles() -> usize {
    20000
}
fn default_particle_dt() -> f64 {
    1e-3
}
fn default_bins() -> usize {
    32
}
fn default_convergence_modes() -> Vec<usize> {
    vec![4, 8, 12, 16]
}
fn default_convergence_time() -> f64 {
    1.0
}
fn default_max_modes() -> usize {
    64
}

impl Scenario {
    /// Circle benchmark: `K = 16`, `t ∈ [0, 1.5]`, 30 snapshots.
    pub fn benchmark_s1(out: impl Into<PathBuf>) -> Self {
        Scenario {
            name: "bench-s1".into(),
            dim: 1,
            periods: vec![TAU],
            vector_field: VectorFieldConfig::S1Benchmark,
            initial: InitialCondition::Uniform { value: 1.0 },
            modes: 16,
            t_final: 1.5,
            n_snapshots: 30,
            scheme: SchemeSpec::dense_expm(),
            solvers: vec![Solver::Alg2, Solver::Standard, Solver::Alg3],
            particles: default_particles(),
            seed: 0,
            particle_dt: default_particle_dt(),
            marginal_bins: default_bins(),
            convergence_modes: default_convergence_modes(),
            convergence_time: default_convergence_time(),
            max_modes: default_max_modes(),
            output: OutputConfig {
                dir: out.into(),
                format: OutputFormat::Csv,
            },
        }
    }

    /// Modified ABC flow with `A, B, C, D = 1, 0.5, 0.2, 0.5`, `K = 8`,
    /// a wrapped Gaussian at the origin with `σ = (0.2, 0.3, 0.3)`, `t = 0.5`.
    pub fn abc(out: impl Into<PathBuf>) -> Self {
        Scenario {
            name: "abc".into(),
            dim: 3,
            periods: vec![1.0; 3],
            vector_field: VectorFieldConfig::AbcModified {
                a: abc_a(),
                b: abc_b(),
                c: abc_c(),
                d: abc_d(),
            },
            initial: InitialCondition::WrappedGaussian {
                mean: vec![0.0; 3],
                sigma: vec![0.2, 0.3, 0.3],
            },
            modes: 8,
            t_final: 0.5,
            n_snapshots: 5,
            scheme: SchemeSpec::krylov(1e-8),
            solvers: vec![Solver::Alg2, Solver::Particles],
            particles: default_particles(),
            seed: 2024,
            particle_dt: 1e-3,
            marginal_bins: default_bins(),
            convergence_modes: vec![2, 4, 6, 8],
            convergence_time: 0.5,
            max_modes: 16,
            output: OutputConfig {
                dir: out.into(),
                format: OutputFormat::Csv,
            },
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let scn: Scenario = serde_json::from_str(s)?;
        scn.validate()?;
        Ok(scn)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.periods.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} periods for dim {}",
                self.periods.len(),
                self.dim
            )));
        }
        if self.modes < 1 {
            return Err(Error::InvalidTruncation("K must be at least 1".into()));
        }
        if self.modes > self.max_modes {
            return Err(Error::SizeGuard {
                size: self.modes,
                limit: self.max_modes,
            });
        }
        if let Some(k) = self.convergence_modes.iter().find(|&&k| k < 1 || k > self.max_modes) {
            return Err(Error::InvalidTruncation(format!(
                "convergence K = {k} outside [1, {}]",
                self.max_modes
            )));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidArgument(format!("t_final {} must be positive", self.t_final)));
        }
        if self.n_snapshots == 0 {
            return Err(Error::InvalidArgument("n_snapshots must be positive".into()));
        }
        if self.marginal_bins == 0 {
            return Err(Error::InvalidArgument("marginal_bins must be positive".into()));
        }
        if !(self.convergence_time > 0.0 && self.convergence_time.is_finite()) {
            return Err(Error::InvalidArgument("convergence_time must be positive".into()));
        }
        self.scheme.validate()?;
        self.vector_field.build(&self.periods)?;
        Ok(())
    }

    pub fn truncation(&self) -> Result<TruncationSpec> {
        TruncationSpec::new(vec![self.modes; self.dim], self.periods.clone())
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.n_snapshots)
            .map(|i| self.t_final * i as f64 / self.n_snapshots as f64)
            .collect()
    }

    pub fn vector_field(&self) -> Result<VectorFieldSpec> {
        self.vector_field.build(&self.periods)
    }

    pub fn has(&self, s: Solver) -> bool {
        self.solvers.contains(&s)
    }
}
