//! Benchmark oracles, scenario files and experiment drivers.

pub mod config;
pub mod exact;
pub mod runner;

pub use config::{InitialCondition, OutputConfig, OutputFormat, Scenario, Solver, TrigKind, TrigTerm, VectorFieldConfig};
pub use exact::{exact_s1_density, exact_s1_flow, exact_s1_functions, S1Function};
pub use runner::{
    convergence_study, run_abc, run_benchmark_s1, run_convergence, run_solve, ConvergenceRow, ConvergenceStudy,
    RunReport, Table,
};
