use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use halfdens::error::{Error, Result, StageExt};
use halfdens::propagation::Scheme;
use halfdens::scenarios::{run_abc, run_benchmark_s1, run_convergence, run_solve, OutputFormat, RunReport, Scenario};

#[derive(Parser)]
#[command(name = "halfdens", version, about = "Half-density spectral solvers on flat tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Circle benchmark x' = -sin 2x.
    #[command(name = "bench-s1")]
    BenchS1(Overrides),
    /// Modified ABC flow on the unit 3-torus.
    Abc(Overrides),
    /// Run any scenario file.
    Solve(Overrides),
    /// Convergence table over the configured truncations.
    Convergence(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// Scenario JSON file; the command's preset when absent.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(short = 'K', long)]
    modes: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long, value_parser = ["expm", "cayley", "krylov", "rk4"])]
    scheme: Option<String>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    particles: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

impl Overrides {
    fn scenario(&self, preset: fn(PathBuf) -> Scenario) -> Result<Scenario> {
        let mut scn = match &self.config {
            Some(path) => Scenario::load(path)?,
            None => preset(PathBuf::from("out")),
        };
        if let Some(k) = self.modes {
            scn.modes = k;
        }
        if let Some(t) = self.t_final {
            scn.t_final = t;
        }
        if let Some(s) = &self.scheme {
            scn.scheme.scheme = s.parse::<Scheme>()?;
        }
        if let Some(dt) = self.dt {
            scn.scheme.dt = Some(dt);
        }
        if let Some(tol) = self.tol {
            scn.scheme.tol = tol;
        }
        if let Some(seed) = self.seed {
            scn.seed = seed;
        }
        if let Some(n) = self.particles {
            scn.particles = n;
        }
        if let Some(dir) = &self.out {
            scn.output.dir = dir.clone();
        }
        if let Some(f) = &self.format {
            scn.output.format = f.parse::<OutputFormat>()?;
        }
        scn.validate()?;
        Ok(scn)
    }
}

fn run(cli: Cli) -> Result<RunReport> {
    let bench = |p: PathBuf| Scenario::benchmark_s1(p);
    let abc = |p: PathBuf| Scenario::abc(p);
    match cli.command {
        Command::BenchS1(o) => run_benchmark_s1(&o.scenario(bench).stage("config")?),
        Command::Abc(o) => run_abc(&o.scenario(abc).stage("config")?),
        Command::Solve(o) => run_solve(&o.scenario(bench).stage("config")?),
        Command::Convergence(o) => run_convergence(&o.scenario(bench).stage("config")?),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(rep) => {
            println!("wrote {} files and manifest.json to {}", rep.files.len(), rep.dir.display());
            for (k, v) in &rep.summary {
                println!("{k} = {v:e}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let e = match e {
                e @ Error::Stage { .. } => e,
                other => other.in_stage("run"),
            };
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
