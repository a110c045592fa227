//! Gradient projection (GPM), iterative regularization, the two-level
//! regularized gradient projection method (GPRM), conditional gradient (CGM)
//! and the two-level regularized conditional gradient method (CGRM).
//!
//! Every run owns its [`OracleCounters`]; problems are shared read-only.

mod armijo;
mod cgm;
mod cgrm;
mod gpm;
mod gprm;
mod iterreg;

use std::fmt;
use std::str::FromStr;

pub use armijo::{armijo_search, ArmijoStep};
pub use cgm::run_cgm;
pub use cgrm::{run_cgrm, run_cgrm_observed};
pub use gpm::run_gpm;
pub use gprm::{run_gprm, run_gprm_observed};
pub use iterreg::run_iterreg;

use crate::error::{contract, Result};
use crate::problem::{OracleCounters, Problem, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Gpm,
    IterReg,
    Gprm,
    Cgm,
    Cgrm,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Gpm,
        Method::IterReg,
        Method::Gprm,
        Method::Cgm,
        Method::Cgrm,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Gpm => "gpm",
            Method::IterReg => "iterreg",
            Method::Gprm => "gprm",
            Method::Cgm => "cgm",
            Method::Cgrm => "cgrm",
        }
    }

    /// Whether the method runs an outer loop over regularization levels.
    pub fn is_two_level(self) -> bool {
        matches!(self, Method::Gprm | Method::Cgrm)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown method `{s}` (expected gpm, iterreg, gprm, cgm or cgrm)"))
    }
}

/// Line-search constants and the derived step-size lower bound `gamma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodConstants {
    pub beta: f64,
    pub theta: f64,
    pub gamma: f64,
    /// `L' = L + eps_0`.
    pub lprime: f64,
    /// CGRM only: `L''` with `mu_{k,l} <= L'' B`.
    pub ldoubleprime: Option<f64>,
    /// CGRM only: diameter of the feasible set.
    pub diameter: Option<f64>,
}

fn check_unit_interval(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v < 1.0) {
        return Err(contract(format!("{name} must lie in (0, 1), got {v}")));
    }
    Ok(())
}

impl MethodConstants {
    /// GPRM: `gamma = min{1, theta * 2 (1 - beta) / L'}`.
    pub fn gprm(beta: f64, theta: f64, lipschitz: f64, epsilon0: f64) -> Result<Self> {
        check_unit_interval("beta", beta)?;
        check_unit_interval("theta", theta)?;
        let lprime = lipschitz + epsilon0;
        if !(lprime > 0.0 && lprime.is_finite()) {
            return Err(contract(format!("L' must be positive, got {lprime}")));
        }
        let lambda_bar = 2.0 * (1.0 - beta) / lprime;
        Ok(Self {
            beta,
            theta,
            gamma: (theta * lambda_bar).min(1.0),
            lprime,
            ldoubleprime: None,
            diameter: None,
        })
    }

    /// CGRM: `gamma = min{theta, lambda', lambda''}` with
    /// `lambda' = 2 (1 - beta) / (L' B^2)`, `lambda'' = 1 / (L'' B)` and
    /// `L'' B = (|f'(x_ref)| + eps_0 |x_ref|) B + L' B^2`.
    pub fn cgrm(
        beta: f64,
        theta: f64,
        lipschitz: f64,
        epsilon0: f64,
        diameter: f64,
        grad_norm_at_ref: f64,
        ref_norm: f64,
    ) -> Result<Self> {
        check_unit_interval("beta", beta)?;
        check_unit_interval("theta", theta)?;
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(contract(format!("diameter must be positive, got {diameter}")));
        }
        let lprime = lipschitz + epsilon0;
        if !(lprime > 0.0 && lprime.is_finite()) {
            return Err(contract(format!("L' must be positive, got {lprime}")));
        }
        let ldoubleprime = grad_norm_at_ref + epsilon0 * ref_norm + lprime * diameter;
        let lambda1 = 2.0 * (1.0 - beta) / (lprime * diameter * diameter);
        let lambda2 = 1.0 / (ldoubleprime * diameter);
        Ok(Self {
            beta,
            theta,
            gamma: theta.min(lambda1).min(lambda2),
            lprime,
            ldoubleprime: Some(ldoubleprime),
            diameter: Some(diameter),
        })
    }

    /// CGRM constants for `prob` with reference point `reference` (the
    /// starting point in practice).
    pub fn cgrm_for(
        prob: &Problem,
        beta: f64,
        theta: f64,
        epsilon0: f64,
        reference: &Vector,
    ) -> Result<Self> {
        prob.check_point(reference, "reference point")?;
        let diameter = prob
            .set
            .diameter()
            .ok_or_else(|| contract("CGRM requires a bounded feasible set"))?;
        Self::cgrm(
            beta,
            theta,
            prob.lipschitz(),
            epsilon0,
            diameter,
            prob.objective.gradient(reference).norm(),
            reference.norm(),
        )
    }
}

/// Artificial termination for the two-level methods, whose outer loops are
/// otherwise infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopPolicy {
    /// Stop before the first level with `eps_l < epsilon_min`.
    pub epsilon_min: f64,
    /// Stop before level `max_outer + 1`.
    pub max_outer: usize,
    /// Inner iterations allowed per level before a runaway error.
    pub max_inner_per_l: u64,
    /// Largest Armijo exponent tried.
    pub max_linesearch_m: u32,
}

impl Default for StopPolicy {
    fn default() -> Self {
        Self {
            epsilon_min: 1e-6,
            max_outer: 60,
            max_inner_per_l: 1_000_000,
            max_linesearch_m: 60,
        }
    }
}

impl StopPolicy {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon_min > 0.0 && self.epsilon_min.is_finite()) {
            return Err(contract("stop.epsilon_min must be positive"));
        }
        if self.max_outer == 0 || self.max_inner_per_l == 0 || self.max_linesearch_m == 0 {
            return Err(contract("stop policy limits must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    /// The next regularization weight fell below `epsilon_min`.
    EpsilonMin,
    /// The outer level cap was reached.
    MaxOuter,
    /// The iteration budget of a single-level method was exhausted.
    MaxIter,
    /// A single-level method found a stationary point.
    Stationary,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::EpsilonMin => "epsilon_min",
            StopReason::MaxOuter => "max_outer",
            StopReason::MaxIter => "max_iter",
            StopReason::Stationary => "stationary",
        }
    }
}

impl FromStr for StopReason {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        [
            StopReason::EpsilonMin,
            StopReason::MaxOuter,
            StopReason::MaxIter,
            StopReason::Stationary,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
        .ok_or_else(|| format!("unknown stop reason `{s}`"))
    }
}

/// One completed outer level (two-level methods) or one iteration
/// (single-level methods, with `inner = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct OuterRecord {
    pub l: usize,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    /// `N_(l)`: inner iterations spent on this level.
    pub inner: u64,
    pub w: Vector,
    /// `phi_eps(w) - phi*_eps`; filled in by callers that run the reference oracle.
    pub phi_gap: Option<f64>,
    /// `f(w) - f*`.
    pub delta_w: Option<f64>,
    pub dist_xstar: Option<f64>,
}

/// Instrumented result of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub method: Method,
    pub outer: Vec<OuterRecord>,
    /// CGRM only: every gap `mu_{k,l}` evaluated, in order.
    pub gaps: Vec<f64>,
    pub counters: OracleCounters,
    /// Smallest accepted step `lambda_k`; infinite if no step was taken.
    pub min_observed_lambda: f64,
    pub final_point: Vector,
    pub stop_reason: StopReason,
}

impl SolverTrace {
    pub(crate) fn new(method: Method, start: Vector) -> Self {
        Self {
            method,
            outer: Vec::new(),
            gaps: Vec::new(),
            counters: OracleCounters::default(),
            min_observed_lambda: f64::INFINITY,
            final_point: start,
            stop_reason: StopReason::MaxIter,
        }
    }

    pub(crate) fn record_step(&mut self, lambda: f64) {
        self.min_observed_lambda = self.min_observed_lambda.min(lambda);
    }

    pub(crate) fn push_record(
        &mut self,
        prob: &Problem,
        l: usize,
        epsilon: Option<f64>,
        delta: Option<f64>,
        inner: u64,
        w: Vector,
    ) {
        self.outer.push(OuterRecord {
            l,
            epsilon,
            delta,
            inner,
            phi_gap: None,
            delta_w: prob.excess(&w),
            dist_xstar: prob.dist_to_xstar(&w),
            w,
        });
    }

    /// Running totals of `N_(l)`.
    pub fn cumulative_inner(&self) -> Vec<u64> {
        self.outer
            .iter()
            .scan(0u64, |acc, r| {
                *acc += r.inner;
                Some(*acc)
            })
            .collect()
    }

    pub fn total_inner(&self) -> u64 {
        self.outer.iter().map(|r| r.inner).sum()
    }
}

/// Inner-loop event reported to observers of the two-level methods.
#[derive(Debug, Clone, Copy)]
pub struct InnerStep<'a> {
    pub level: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub k: u64,
    pub x: &'a Vector,
    /// Projection point (GPRM) or LMO vertex (CGRM).
    pub y: &'a Vector,
    /// `|x - y|` for GPRM, the gap `mu_{k,l}` for CGRM.
    pub measure: f64,
    /// Accepted Armijo step, or `None` when the level's stop test fired.
    pub lambda: Option<f64>,
}

pub(crate) fn check_start(prob: &Problem, x0: &Vector) -> Result<()> {
    prob.check_point(x0, "starting point")
}
