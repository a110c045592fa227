//! Two-level regularized first-order methods for smooth convex constrained
//! minimization, together with the single-level baselines they are compared
//! against.
//!
//! The crate is organised bottom-up:
//!
//! - [`problem`]: objectives, feasible-set interfaces, problem instances,
//!   oracle counters, and small numerical validators.
//! - [`oracles`]: exact projections and linear minimization oracles for
//!   boxes, Euclidean balls and the unit simplex.
//! - [`regularization`]: the perturbed objective `f + 0.5 eps |x|^2`,
//!   parameter schedules, and a high-accuracy reference solver for the
//!   regularized minimizer `z(eps)`.
//! - [`solvers`]: gradient projection, iterative regularization, the
//!   two-level regularized gradient projection method, conditional gradient,
//!   and its two-level regularized variant.
//!
//! Vectors are plain `nalgebra::DVector<f64>`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod oracles;
pub mod problem;
pub mod regularization;
pub mod solvers;

pub use error::{Error, Result};
pub use oracles::{BallSet, BoxSet, SimplexSet};
pub use problem::{
    FeasibleSet, FnObjective, LeastSquares, LinearObjective, Objective, OracleCounters, Problem,
    Vector, ZeroObjective, MEMBERSHIP_TOL,
};
pub use regularization::{
    GeometricSchedule, IterRegSchedule, PathReport, PerturbedObjective, TikhonovRecord,
};
pub use solvers::{
    run_cgm, run_cgrm, run_cgrm_observed, run_gpm, run_gprm, run_gprm_observed, run_iterreg,
    InnerStep, Method, MethodConstants, OuterRecord, SolverTrace, StopPolicy, StopReason,
};
