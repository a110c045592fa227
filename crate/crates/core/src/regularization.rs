//! Tikhonov-perturbed objectives, regularization schedules and the reference
//! solver for the regularized minimizer `z(eps)`.

use crate::error::{contract, Error, Result};
use crate::problem::{check_dim, Objective, Problem, Vector};

/// Default stationarity tolerance of [`tikhonov_solve`].
pub const DEFAULT_ORACLE_TOL: f64 = 1e-11;

/// Iteration cap of [`tikhonov_solve`]; exceeding it points at a wrong `L`.
pub const ORACLE_MAX_ITER: u64 = 10_000_000;

/// `phi_eps(x) = f(x) + 0.5 eps |x|^2`.
///
/// `epsilon0` is the largest regularization weight of the run and fixes the
/// shared gradient Lipschitz constant `L' = L + epsilon0`.
#[derive(Clone, Copy)]
pub struct PerturbedObjective<'a> {
    base: &'a dyn Objective,
    epsilon: f64,
    epsilon0: f64,
}

impl<'a> PerturbedObjective<'a> {
    pub fn new(base: &'a dyn Objective, epsilon: f64, epsilon0: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(contract(format!("epsilon must be non-negative, got {epsilon}")));
        }
        if !(epsilon0 > 0.0 && epsilon0.is_finite()) {
            return Err(contract(format!("epsilon0 must be positive, got {epsilon0}")));
        }
        if epsilon > epsilon0 {
            return Err(contract(format!(
                "epsilon {epsilon} exceeds epsilon0 {epsilon0}"
            )));
        }
        Ok(Self {
            base,
            epsilon,
            epsilon0,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn base(&self) -> &'a dyn Objective {
        self.base
    }

    /// `L' = L + epsilon0`.
    pub fn lipschitz_prime(&self) -> f64 {
        self.base.lipschitz() + self.epsilon0
    }
}

impl Objective for PerturbedObjective<'_> {
    fn dim(&self) -> usize {
        self.base.dim()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.base.value(x) + 0.5 * self.epsilon * x.norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.base.gradient(x) + x * self.epsilon
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz_prime()
    }

    fn value_change(&self, x: &Vector, s: &Vector) -> f64 {
        self.base.value_change(x, s) + 0.5 * self.epsilon * (2.0 * x.dot(s) + s.norm_squared())
    }
}

/// `eps_l = nu^l eps_0`, `delta_l = eps_l^(1 + sigma)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometricSchedule {
    pub epsilon0: f64,
    pub nu: f64,
    pub sigma: f64,
}

impl GeometricSchedule {
    pub fn new(epsilon0: f64, nu: f64, sigma: f64) -> Result<Self> {
        if !(epsilon0 > 0.0 && epsilon0.is_finite()) {
            return Err(contract(format!("epsilon0 must be positive, got {epsilon0}")));
        }
        if !(nu > 0.0 && nu < 1.0) {
            return Err(contract(format!("nu must lie in (0, 1), got {nu}")));
        }
        if !(sigma > 0.0 && sigma <= 1.0) {
            return Err(contract(format!("sigma must lie in (0, 1], got {sigma}")));
        }
        Ok(Self {
            epsilon0,
            nu,
            sigma,
        })
    }

    /// `(eps_l, delta_l)`.
    pub fn params(&self, l: usize) -> (f64, f64) {
        let eps = self.nu.powi(l as i32) * self.epsilon0;
        (eps, eps.powf(1.0 + self.sigma))
    }
}

impl Default for GeometricSchedule {
    fn default() -> Self {
        Self {
            epsilon0: 1.0,
            nu: 0.5,
            sigma: 0.5,
        }
    }
}

/// `lambda_k = (k+1)^(-1/2)`, `eps_k = (k+1)^(-tau)` with `tau` in `(0, 0.5)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRegSchedule {
    pub tau: f64,
}

impl IterRegSchedule {
    pub fn new(tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau < 0.5) {
            return Err(contract(format!("tau must lie in (0, 0.5), got {tau}")));
        }
        Ok(Self { tau })
    }

    /// `(lambda_k, eps_k)`.
    pub fn params(&self, k: usize) -> (f64, f64) {
        let base = (k + 1) as f64;
        (base.powf(-0.5), base.powf(-self.tau))
    }
}

/// High-accuracy regularized minimizer `z(eps)` with its certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct TikhonovRecord {
    pub epsilon: f64,
    pub z: Vector,
    /// `|z - P[z - phi_eps'(z)]|`.
    pub residual: f64,
    /// `phi_eps(z)`, i.e. the regularized optimal value.
    pub value: f64,
    pub iterations: u64,
}

/// Solves `min_D f + 0.5 eps |x|^2` by projected gradient with step
/// `1 / (L + eps)`, stopping once the unit-step stationarity residual is at
/// most `tol`.
///
/// The fixed step keeps this oracle independent of the line-search code it
/// is used to validate.
pub fn tikhonov_solve(prob: &Problem, epsilon: f64, tol: f64) -> Result<TikhonovRecord> {
    tikhonov_solve_capped(prob, epsilon, tol, ORACLE_MAX_ITER)
}

fn tikhonov_solve_capped(
    prob: &Problem,
    epsilon: f64,
    tol: f64,
    max_iter: u64,
) -> Result<TikhonovRecord> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(contract(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(tol >= 1e-12) {
        return Err(contract(format!("tolerance must be at least 1e-12, got {tol}")));
    }
    if !prob.set.has_projection() {
        return Err(Error::Unsupported("a projection oracle"));
    }
    let phi = PerturbedObjective::new(prob.objective.as_ref(), epsilon, epsilon)?;
    let step = 1.0 / (prob.lipschitz() + epsilon);
    let mut z = prob.set.project(&Vector::zeros(prob.dim()))?;
    for it in 0..max_iter {
        let g = phi.gradient(&z);
        let residual = (&z - prob.set.project(&(&z - &g))?).norm();
        if !residual.is_finite() {
            return Err(Error::OracleFailure(format!(
                "non-finite residual at eps = {epsilon}"
            )));
        }
        if residual <= tol {
            return Ok(TikhonovRecord {
                epsilon,
                value: phi.value(&z),
                z,
                residual,
                iterations: it,
            });
        }
        z = prob.set.project(&(&z - g * step))?;
    }
    Err(Error::OracleFailure(format!(
        "z({epsilon}) not certified to {tol} within {max_iter} iterations; check L"
    )))
}

/// Reference solutions along a grid of regularization weights.
pub fn tikhonov_path(prob: &Problem, grid: &[f64], tol: f64) -> Result<Vec<TikhonovRecord>> {
    grid.iter().map(|&eps| tikhonov_solve(prob, eps, tol)).collect()
}

/// A point on the regularization path: `z(eps)` with `f(z)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathPoint {
    pub epsilon: f64,
    pub z: Vector,
    pub f_value: f64,
}

impl PathPoint {
    pub fn from_record(prob: &Problem, rec: &TikhonovRecord) -> Self {
        Self {
            epsilon: rec.epsilon,
            z: rec.z.clone(),
            f_value: prob.objective.value(&rec.z),
        }
    }

    /// `z(0) := x*_n`.
    pub fn minimal_norm(prob: &Problem) -> Result<Self> {
        let xstar = prob
            .known_xstar_n
            .clone()
            .ok_or_else(|| contract("z(0) requires a known minimal-norm solution"))?;
        Ok(Self {
            epsilon: 0.0,
            f_value: prob.objective.value(&xstar),
            z: xstar,
        })
    }

    fn regularized_value(&self) -> f64 {
        self.f_value + 0.5 * self.epsilon * self.z.norm_squared()
    }
}

/// Outcome of the three monotonicity inequalities between `z(mu)` and
/// `z(eta)`, `mu < eta`. Each slack is `rhs - lhs`; an inequality holds when
/// its slack is at least `-tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathReport {
    pub mu: f64,
    pub eta: f64,
    /// `0.5 eta (|z(mu)|^2 - |z(eta)|^2) - (f(z(eta)) - f(z(mu)))`.
    pub value_slack: f64,
    /// `0.5 (eta - mu) |z(mu)|^2 - (phi*_eta - phi*_mu)`.
    pub optimal_value_slack: f64,
    /// `|z(mu)| - |z(eta)|`.
    pub norm_slack: f64,
    pub tol: f64,
}

impl PathReport {
    pub fn value_holds(&self) -> bool {
        self.value_slack >= -self.tol
    }

    pub fn optimal_value_holds(&self) -> bool {
        self.optimal_value_slack >= -self.tol
    }

    pub fn norm_holds(&self) -> bool {
        self.norm_slack >= -self.tol
    }

    pub fn all_hold(&self) -> bool {
        self.value_holds() && self.optimal_value_holds() && self.norm_holds()
    }
}

/// Evaluates the path inequalities for two precomputed path points.
pub fn compare_path_points(lo: &PathPoint, hi: &PathPoint, tol: f64) -> Result<PathReport> {
    let (mu, eta) = (lo.epsilon, hi.epsilon);
    if !(mu >= 0.0 && mu < eta) {
        return Err(contract(format!("path check requires 0 <= mu < eta, got {mu}, {eta}")));
    }
    check_dim("path point", hi.z.len(), lo.z.len())?;
    let (nmu, neta) = (lo.z.norm_squared(), hi.z.norm_squared());
    Ok(PathReport {
        mu,
        eta,
        value_slack: 0.5 * eta * (nmu - neta) - (hi.f_value - lo.f_value),
        optimal_value_slack: 0.5 * (eta - mu) * nmu
            - (hi.regularized_value() - lo.regularized_value()),
        norm_slack: lo.z.norm() - hi.z.norm(),
        tol,
    })
}

/// Checks the path inequalities between `z(mu)` and `z(eta)` using
/// [`tikhonov_solve`] at [`DEFAULT_ORACLE_TOL`]; `mu = 0` uses the known
/// minimal-norm solution.
pub fn path_check(prob: &Problem, mu: f64, eta: f64, tol: f64) -> Result<PathReport> {
    if !(mu >= 0.0 && mu < eta) {
        return Err(contract(format!("path check requires 0 <= mu < eta, got {mu}, {eta}")));
    }
    if !(tol > 0.0) {
        return Err(contract("path check tolerance must be positive"));
    }
    let lo = if mu == 0.0 {
        PathPoint::minimal_norm(prob)?
    } else {
        PathPoint::from_record(prob, &tikhonov_solve(prob, mu, DEFAULT_ORACLE_TOL)?)
    };
    let hi = PathPoint::from_record(prob, &tikhonov_solve(prob, eta, DEFAULT_ORACLE_TOL)?);
    compare_path_points(&lo, &hi, tol)
}
