use super::{check_start, Method, SolverTrace, StopReason};
use crate::error::{contract, Result};
use crate::problem::{Problem, Vector};

/// Conditional gradient with step `lambda_k = min{1, theta_k beta_k}`,
/// `beta_k = -<f'(x_k), d_k> / |d_k|^2`, `0 < theta_k < 2 / L`.
///
/// Stops early when `d_k = 0`, or when the gap `-<f'(x_k), d_k>` vanishes so
/// that every further step would be zero.
pub fn run_cgm(prob: &Problem, theta_k: f64, x0: &Vector, max_iter: usize) -> Result<SolverTrace> {
    let lip = prob.lipschitz();
    if !(theta_k > 0.0 && theta_k * lip < 2.0) {
        return Err(contract(format!(
            "CGM parameter {theta_k} outside (0, 2/L) with L = {lip}"
        )));
    }
    if !prob.set.has_lmo() || prob.set.diameter().is_none() {
        return Err(contract("CGM requires a bounded set with a linear minimization oracle"));
    }
    check_start(prob, x0)?;
    let mut trace = SolverTrace::new(Method::Cgm, x0.clone());
    let mut x = x0.clone();
    trace.stop_reason = StopReason::MaxIter;
    for k in 1..=max_iter {
        let g = prob.objective.gradient(&x);
        let y = prob.set.lmo(&g)?;
        trace.counters.gradient_evals += 1;
        trace.counters.lmo_calls += 1;
        let d = &y - &x;
        let d_sq = d.norm_squared();
        let gap = -g.dot(&d);
        if d_sq == 0.0 || gap <= 0.0 {
            trace.stop_reason = StopReason::Stationary;
            break;
        }
        let lambda = (theta_k * gap / d_sq).min(1.0);
        x += d * lambda;
        trace.counters.inner_iterations += 1;
        trace.record_step(lambda);
        trace.push_record(prob, k, None, None, 1, x.clone());
    }
    trace.final_point = x;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::oracles::{project_simplex, SimplexSet};
    use crate::problem::{FeasibleSet, LeastSquares};
    use nalgebra::{dvector, DMatrix};
    use std::sync::Arc;

    fn shifted_square_on_simplex() -> Problem {
        let c = dvector![2.0, 0.0, 0.0];
        let obj = LeastSquares::new(DMatrix::identity(3, 3), c).unwrap().with_lipschitz(1.0);
        Problem::new(Arc::new(obj), Arc::new(SimplexSet::new(3).unwrap())).unwrap()
    }

    #[test]
    fn single_step_hits_vertex_optimum() {
        let prob = shifted_square_on_simplex();
        let x0 = SimplexSet::new(3).unwrap().barycenter();
        // y0 = e1, d0 = (2/3, -1/3, -1/3), beta_0 = 2, lambda_0 = min{1, 1.8} = 1.
        let trace = run_cgm(&prob, 0.9, &x0, 100).unwrap();
        assert_eq!(trace.outer.len(), 1);
        assert_eq!(trace.final_point, dvector![1.0, 0.0, 0.0]);
        assert_eq!(trace.stop_reason, StopReason::Stationary);
        assert_eq!(trace.min_observed_lambda, 1.0);
        // The optimum is the projection of (2,0,0) onto the simplex.
        let proj = project_simplex(&dvector![2.0, 0.0, 0.0], &SimplexSet::new(3).unwrap()).unwrap();
        assert_eq!(proj, trace.final_point);
    }

    #[test]
    fn optimal_start_returns_immediately() {
        let prob = shifted_square_on_simplex();
        let x0 = dvector![1.0, 0.0, 0.0];
        let trace = run_cgm(&prob, 0.9, &x0, 100).unwrap();
        assert!(trace.outer.is_empty());
        assert_eq!(trace.final_point, x0);
    }

    #[test]
    fn parameter_window_enforced() {
        let prob = shifted_square_on_simplex();
        let x0 = SimplexSet::new(3).unwrap().barycenter();
        assert!(matches!(run_cgm(&prob, 2.5, &x0, 10), Err(Error::Contract(_))));
        assert!(matches!(run_cgm(&prob, 0.0, &x0, 10), Err(Error::Contract(_))));
    }

    #[test]
    fn iterates_stay_feasible() {
        let c = dvector![1.0, 1.0, 0.0];
        let obj = LeastSquares::new(DMatrix::identity(3, 3), c).unwrap().with_lipschitz(1.0);
        let set = SimplexSet::new(3).unwrap();
        let prob = Problem::new(Arc::new(obj), Arc::new(set)).unwrap();
        let trace = run_cgm(&prob, 1.0, &dvector![0.0, 0.0, 1.0], 2000).unwrap();
        assert!(trace.outer.iter().all(|r| set.contains(&r.w, 1e-9)));
        assert!((&trace.final_point - dvector![0.5, 0.5, 0.0]).norm() < 1e-2);
    }
}
