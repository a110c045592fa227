//! Benchmark harness for the `regrad` solvers: problem generators with known
//! minimal-norm solutions, complexity measurement against the closed-form
//! bounds, trace serialization, experiment configuration and the acceptance
//! suite shared by `regrad verify` and the `acceptance` test target.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod complexity;
pub mod config;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod trace_io;

pub use complexity::{measure_complexity, theoretical_bound, ComplexityReport, DEFAULT_ALPHA_GRID};
pub use config::ExperimentConfig;
pub use error::{BenchError, BenchResult};
pub use experiment::{run_experiment, run_sweep, ExperimentOutcome, SweepConfig};
pub use generators::{
    make_illposed_box, make_illposed_simplex, make_rankdef_lsq, make_wellposed_box, make_wellposed_simplex,
    problem_by_label, GeneratedProblem,
};
