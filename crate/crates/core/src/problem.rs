//! Objectives, feasible sets and problem instances.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};

pub type Vector = DVector<f64>;

/// Absolute tolerance used for every membership test in the crate.
pub const MEMBERSHIP_TOL: f64 = 1e-10;

/// A smooth convex function with a Lipschitz continuous gradient.
pub trait Objective: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &Vector) -> f64;

    fn gradient(&self, x: &Vector) -> Vector;

    /// Lipschitz constant of the gradient.
    fn lipschitz(&self) -> f64;

    /// `f(x + s) - f(x)`.
    ///
    /// Line searches compare this difference against quantities of order
    /// `|s|^2`, which fall below the rounding error of `f` itself late in a
    /// run. Objectives with closed-form differences override this.
    fn value_change(&self, x: &Vector, s: &Vector) -> f64 {
        self.value(&(x + s)) - self.value(x)
    }
}

/// `f(x) = 0.5 |A x - b|^2`.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    a: DMatrix<f64>,
    b: Vector,
    lipschitz: f64,
}

impl LeastSquares {
    /// Builds the objective with `L = |A^T A|` estimated by power iteration.
    pub fn new(a: DMatrix<f64>, b: Vector) -> Result<Self> {
        if a.nrows() != b.len() {
            return Err(contract(format!(
                "matrix has {} rows but right-hand side has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(contract("least-squares data must be finite"));
        }
        let lipschitz = estimate_lipschitz_quadratic(&a)?;
        Ok(Self { a, b, lipschitz })
    }

    /// Replaces the estimated Lipschitz constant by an analytic one.
    pub fn with_lipschitz(mut self, lipschitz: f64) -> Self {
        self.lipschitz = lipschitz;
        self
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &Vector {
        &self.b
    }
}

impl Objective for LeastSquares {
    fn dim(&self) -> usize {
        self.a.ncols()
    }

    fn value(&self, x: &Vector) -> f64 {
        0.5 * (&self.a * x - &self.b).norm_squared()
    }

    fn gradient(&self, x: &Vector) -> Vector {
        self.a.tr_mul(&(&self.a * x - &self.b))
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn value_change(&self, x: &Vector, s: &Vector) -> f64 {
        let residual = &self.a * x - &self.b;
        let a_s = &self.a * s;
        residual.dot(&a_s) + 0.5 * a_s.norm_squared()
    }
}

/// `f(x) = <c, x>`.
#[derive(Debug, Clone)]
pub struct LinearObjective {
    c: Vector,
}

impl LinearObjective {
    pub fn new(c: Vector) -> Self {
        Self { c }
    }
}

impl Objective for LinearObjective {
    fn dim(&self) -> usize {
        self.c.len()
    }

    fn value(&self, x: &Vector) -> f64 {
        self.c.dot(x)
    }

    fn gradient(&self, _x: &Vector) -> Vector {
        self.c.clone()
    }

    fn lipschitz(&self) -> f64 {
        0.0
    }

    fn value_change(&self, _x: &Vector, s: &Vector) -> f64 {
        self.c.dot(s)
    }
}

/// `f = 0`; every feasible point is a solution.
#[derive(Debug, Clone)]
pub struct ZeroObjective {
    dim: usize,
}

impl ZeroObjective {
    pub fn new(dim: usize) -> Self {
        Self { dim }
    }
}

impl Objective for ZeroObjective {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, _x: &Vector) -> f64 {
        0.0
    }

    fn gradient(&self, _x: &Vector) -> Vector {
        Vector::zeros(self.dim)
    }

    fn lipschitz(&self) -> f64 {
        0.0
    }

    fn value_change(&self, _x: &Vector, _s: &Vector) -> f64 {
        0.0
    }
}

/// Objective assembled from closures.
pub struct FnObjective<V, G> {
    dim: usize,
    value: V,
    gradient: G,
    lipschitz: f64,
}

impl<V, G> FnObjective<V, G>
where
    V: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    pub fn new(dim: usize, value: V, gradient: G, lipschitz: f64) -> Self {
        Self {
            dim,
            value,
            gradient,
            lipschitz,
        }
    }
}

impl<V, G> Objective for FnObjective<V, G>
where
    V: Fn(&Vector) -> f64 + Send + Sync,
    G: Fn(&Vector) -> Vector + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &Vector) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vector) -> Vector {
        (self.gradient)(x)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// A nonempty closed convex set described by the oracles it supports.
///
/// At least one of [`FeasibleSet::project`] and [`FeasibleSet::lmo`] must be
/// provided.
pub trait FeasibleSet: Send + Sync {
    fn dim(&self) -> usize;

    fn contains(&self, x: &Vector, tol: f64) -> bool;

    /// Diameter, or `None` for unbounded sets.
    fn diameter(&self) -> Option<f64>;

    fn has_projection(&self) -> bool {
        false
    }

    fn has_lmo(&self) -> bool {
        false
    }

    /// Euclidean projection onto the set.
    fn project(&self, _x: &Vector) -> Result<Vector> {
        Err(Error::Unsupported("a projection oracle"))
    }

    /// A minimizer of `<g, y>` over the set.
    fn lmo(&self, _g: &Vector) -> Result<Vector> {
        Err(Error::Unsupported("a linear minimization oracle"))
    }

    /// Bit-exact textual description, used as a cache key.
    fn fingerprint(&self) -> String;
}

/// Per-run oracle call counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleCounters {
    pub gradient_evals: u64,
    pub projections: u64,
    pub lmo_calls: u64,
    pub linesearch_trials: u64,
    pub inner_iterations: u64,
}

/// Minimize `objective` over `set`, optionally with known ground truth.
#[derive(Clone)]
pub struct Problem {
    pub objective: Arc<dyn Objective>,
    pub set: Arc<dyn FeasibleSet>,
    pub known_fstar: Option<f64>,
    pub known_xstar_n: Option<Vector>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("dim", &self.dim())
            .field("lipschitz", &self.objective.lipschitz())
            .field("set", &self.set.fingerprint())
            .field("known_fstar", &self.known_fstar)
            .field("known_xstar_n", &self.known_xstar_n.as_ref().map(|v| v.as_slice()))
            .finish()
    }
}

impl Problem {
    pub fn new(objective: Arc<dyn Objective>, set: Arc<dyn FeasibleSet>) -> Result<Self> {
        if objective.dim() != set.dim() {
            return Err(contract(format!(
                "objective has dimension {} but the set has dimension {}",
                objective.dim(),
                set.dim()
            )));
        }
        if objective.dim() == 0 {
            return Err(contract("dimension must be positive"));
        }
        if !set.has_projection() && !set.has_lmo() {
            return Err(contract("feasible set must provide a projection or an LMO"));
        }
        let lipschitz = objective.lipschitz();
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(contract(format!("invalid Lipschitz constant {lipschitz}")));
        }
        Ok(Self {
            objective,
            set,
            known_fstar: None,
            known_xstar_n: None,
        })
    }

    /// Attaches the optimal value and the minimal-norm solution.
    pub fn with_ground_truth(mut self, fstar: f64, xstar_n: Vector) -> Result<Self> {
        self.check_point(&xstar_n, "minimal-norm solution")?;
        let value = self.objective.value(&xstar_n);
        if (value - fstar).abs() > 1e-10 {
            return Err(contract(format!(
                "f(x*_n) = {value} disagrees with f* = {fstar}"
            )));
        }
        self.known_fstar = Some(fstar);
        self.known_xstar_n = Some(xstar_n);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.objective.dim()
    }

    pub fn lipschitz(&self) -> f64 {
        self.objective.lipschitz()
    }

    /// Checks dimension, finiteness and membership of a point.
    pub fn check_point(&self, x: &Vector, what: &str) -> Result<()> {
        if x.len() != self.dim() {
            return Err(contract(format!(
                "{what} has dimension {} but the problem has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(contract(format!("{what} has non-finite components")));
        }
        if !self.set.contains(x, MEMBERSHIP_TOL) {
            return Err(contract(format!("{what} is not feasible")));
        }
        Ok(())
    }

    /// `f(x) - f*`, when `f*` is known.
    pub fn excess(&self, x: &Vector) -> Option<f64> {
        self.known_fstar.map(|fstar| self.objective.value(x) - fstar)
    }

    /// `|x - x*_n|`, when `x*_n` is known.
    pub fn dist_to_xstar(&self, x: &Vector) -> Option<f64> {
        self.known_xstar_n.as_ref().map(|xs| (x - xs).norm())
    }
}

pub(crate) fn check_dim(what: &str, got: usize, expected: usize) -> Result<()> {
    if got != expected {
        return Err(contract(format!(
            "{what} has dimension {got}, expected {expected}"
        )));
    }
    Ok(())
}

/// Largest relative error between the analytic gradient and a central
/// difference, `max_i |fd_i - g_i| / (1 + |g_i|)`.
pub fn check_gradient(obj: &dyn Objective, x: &Vector, h: f64) -> Result<f64> {
    if !(h > 1e-10 && h < 1e-2) {
        return Err(contract(format!("difference step {h} outside (1e-10, 1e-2)")));
    }
    check_dim("point", x.len(), obj.dim())?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(contract("point has non-finite components"));
    }
    let grad = obj.gradient(x);
    check_dim("gradient", grad.len(), x.len())?;
    let mut worst = 0.0_f64;
    let mut probe = x.clone();
    for i in 0..x.len() {
        probe[i] = x[i] + h;
        let up = obj.value(&probe);
        probe[i] = x[i] - h;
        let down = obj.value(&probe);
        probe[i] = x[i];
        if !(up.is_finite() && down.is_finite()) || !grad[i].is_finite() {
            return Err(Error::OracleFailure(format!(
                "non-finite value near coordinate {i}"
            )));
        }
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - grad[i]).abs() / (1.0 + grad[i].abs()));
    }
    Ok(worst)
}

/// Spectral norm of `A^T A` by power iteration, i.e. the gradient Lipschitz
/// constant of `0.5 |A x - b|^2`. Returns 0 for a zero matrix.
pub fn estimate_lipschitz_quadratic(a: &DMatrix<f64>) -> Result<f64> {
    if a.iter().any(|v| !v.is_finite()) {
        return Err(contract("matrix entries must be finite"));
    }
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return Ok(0.0);
    }
    let gram = a.tr_mul(a);
    // Low-discrepancy start so no coordinate direction is systematically missed.
    let mut v = Vector::from_fn(n, |i, _| 1.0 + (0.618_033_988_749_895 * (i + 1) as f64).fract());
    v /= v.norm();
    let mut estimate = 0.0;
    for _ in 0..100_000 {
        let w = &gram * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return Ok(0.0);
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - estimate).abs() <= 1e-10 * next.abs() {
            // One more multiplication pins the Rayleigh quotient at the converged vector.
            return Ok(v.dot(&(&gram * &v)).max(next));
        }
        estimate = next;
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn gradient_check_half_squared_norm() {
        let obj = FnObjective::new(2, |x: &Vector| 0.5 * x.norm_squared(), |x: &Vector| x.clone(), 1.0);
        let err = check_gradient(&obj, &dvector![1.0, 2.0], 1e-6).unwrap();
        assert!(err < 1e-8, "{err}");
    }

    #[test]
    fn gradient_check_linear() {
        let obj = LinearObjective::new(dvector![3.0, -1.0]);
        for x in [dvector![0.0, 0.0], dvector![0.5, -0.25], dvector![1.0, 2.0]] {
            let err = check_gradient(&obj, &x, 1e-6).unwrap();
            assert!(err < 1e-10, "{err} at {x}");
        }
    }

    #[test]
    fn gradient_check_rank_deficient_least_squares() {
        let a = dmatrix![1.0, 1.0; 0.0, 0.0];
        let obj = LeastSquares::new(a.clone(), dvector![1.0, 0.0]).unwrap();
        let x = dvector![1.0, 0.0];
        // Hand gradient A^T (A x - b) vanishes here.
        let hand = a.transpose() * (&a * &x - dvector![1.0, 0.0]);
        assert_eq!(hand, dvector![0.0, 0.0]);
        assert_eq!(obj.gradient(&x), hand);
        assert!(check_gradient(&obj, &x, 1e-6).unwrap() < 1e-7);
    }

    #[test]
    fn gradient_check_rejects_bad_step() {
        let obj = ZeroObjective::new(2);
        let x = dvector![0.0, 0.0];
        assert!(matches!(check_gradient(&obj, &x, 1e-11), Err(Error::Contract(_))));
        assert!(matches!(check_gradient(&obj, &x, 0.1), Err(Error::Contract(_))));
    }

    #[test]
    fn gradient_check_reports_non_finite_values() {
        let obj = FnObjective::new(
            1,
            |x: &Vector| if x[0] > 0.0 { f64::INFINITY } else { 0.0 },
            |_x: &Vector| dvector![0.0],
            0.0,
        );
        let err = check_gradient(&obj, &dvector![0.0], 1e-6).unwrap_err();
        assert!(matches!(err, Error::OracleFailure(_)));
    }

    #[test]
    fn lipschitz_by_power_iteration() {
        let eye = DMatrix::<f64>::identity(2, 2);
        assert!((estimate_lipschitz_quadratic(&eye).unwrap() - 1.0).abs() < 1e-10);
        let diag = dmatrix![2.0, 0.0; 0.0, 1.0];
        assert!((estimate_lipschitz_quadratic(&diag).unwrap() - 4.0).abs() < 4e-10);
        // A^T A = [[1,1],[1,1]], eigenvalues {0, 2}.
        let rank_one = dmatrix![1.0, 1.0; 0.0, 0.0];
        let gram = rank_one.tr_mul(&rank_one);
        let top: f64 = gram.symmetric_eigen().eigenvalues.max();
        assert!((top - 2.0).abs() < 1e-12);
        assert!((estimate_lipschitz_quadratic(&rank_one).unwrap() - 2.0).abs() < 2e-10);
        assert_eq!(estimate_lipschitz_quadratic(&DMatrix::zeros(2, 3)).unwrap(), 0.0);
    }

    #[test]
    fn lipschitz_matches_symmetric_eigensolver() {
        let a = dmatrix![1.0, 2.0, 0.5; -1.0, 0.3, 2.0; 0.0, 1.0, 1.0; 4.0, 0.0, -1.0];
        let top = a.tr_mul(&a).symmetric_eigen().eigenvalues.max();
        let est = estimate_lipschitz_quadratic(&a).unwrap();
        assert!((est - top).abs() <= 1e-9 * top, "{est} vs {top}");
    }

    #[test]
    fn least_squares_value_change_matches_difference() {
        let obj = LeastSquares::new(dmatrix![1.0, -1.0, 0.0], dvector![0.25]).unwrap();
        let x = dvector![0.2, 0.5, 0.3];
        let s = dvector![0.1, -0.05, -0.05];
        let direct = obj.value(&(&x + &s)) - obj.value(&x);
        assert!((obj.value_change(&x, &s) - direct).abs() < 1e-15);
    }

    #[test]
    fn least_squares_rejects_shape_mismatch() {
        let err = LeastSquares::new(DMatrix::identity(2, 2), dvector![1.0]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }
}
