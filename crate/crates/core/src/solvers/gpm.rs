use super::{check_start, Method, SolverTrace, StopReason};
use crate::error::{contract, Result};
use crate::problem::{Problem, Vector};

/// Fixed-step gradient projection `x_{k+1} = P[x_k - lambda f'(x_k)]` with
/// `0 < lambda < 2 / L`. Records one trace row per iteration.
pub fn run_gpm(prob: &Problem, lambda: f64, x0: &Vector, max_iter: usize) -> Result<SolverTrace> {
    let lip = prob.lipschitz();
    if !(lambda > 0.0 && lambda * lip < 2.0) {
        return Err(contract(format!(
            "GPM step {lambda} outside (0, 2/L) with L = {lip}"
        )));
    }
    check_start(prob, x0)?;
    if !prob.set.has_projection() {
        return Err(contract("GPM requires a projection oracle"));
    }
    let mut trace = SolverTrace::new(Method::Gpm, x0.clone());
    let mut x = x0.clone();
    for k in 1..=max_iter {
        let g = prob.objective.gradient(&x);
        x = prob.set.project(&(&x - g * lambda))?;
        trace.counters.gradient_evals += 1;
        trace.counters.projections += 1;
        trace.counters.inner_iterations += 1;
        trace.record_step(lambda);
        trace.push_record(prob, k, None, None, 1, x.clone());
    }
    trace.final_point = x;
    trace.stop_reason = StopReason::MaxIter;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::oracles::BoxSet;
    use crate::problem::{FnObjective, LeastSquares};
    use nalgebra::{dmatrix, dvector};
    use std::sync::Arc;

    #[test]
    fn reaches_shifted_box_corner_in_one_step() {
        let obj = FnObjective::new(2, |x: &Vector| 0.5 * x.norm_squared(), |x: &Vector| x.clone(), 1.0);
        let prob = Problem::new(Arc::new(obj), Arc::new(BoxSet::cube(2, 1.0, 2.0).unwrap()))
            .unwrap()
            .with_ground_truth(1.0, dvector![1.0, 1.0])
            .unwrap();
        let trace = run_gpm(&prob, 0.5, &dvector![2.0, 2.0], 5).unwrap();
        assert_eq!(trace.outer[0].w, dvector![1.0, 1.0]);
        // KKT at (1,1): gradient (1,1) is a non-negative combination of the
        // outward normals (-1,0), (0,-1) negated, i.e. both lower bounds active.
        let g = prob.objective.gradient(&dvector![1.0, 1.0]);
        assert!(g.iter().all(|&v| v >= 0.0));
        assert!(trace.outer.iter().all(|r| r.delta_w == Some(0.0)));
        assert_eq!(trace.counters.inner_iterations, 5);
    }

    #[test]
    fn stationary_start_never_moves() {
        let obj = LeastSquares::new(dmatrix![1.0, 1.0], dvector![1.0]).unwrap();
        let prob = Problem::new(Arc::new(obj), Arc::new(BoxSet::cube(2, -1.0, 1.0).unwrap()))
            .unwrap()
            .with_ground_truth(0.0, dvector![0.5, 0.5])
            .unwrap();
        let trace = run_gpm(&prob, 0.5, &dvector![1.0, 0.0], 100).unwrap();
        assert!(trace.outer.iter().all(|r| r.w == dvector![1.0, 0.0]));
        let dist = trace.outer.last().unwrap().dist_xstar.unwrap();
        assert!((dist - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn rejects_long_steps_and_infeasible_starts() {
        let obj = LeastSquares::new(dmatrix![1.0, 1.0], dvector![1.0]).unwrap();
        let prob = Problem::new(Arc::new(obj), Arc::new(BoxSet::cube(2, -1.0, 1.0).unwrap())).unwrap();
        // L = 2, so lambda must stay below 1.
        assert!(matches!(run_gpm(&prob, 1.0, &dvector![0.0, 0.0], 1), Err(Error::Contract(_))));
        assert!(matches!(run_gpm(&prob, 0.5, &dvector![3.0, 0.0], 1), Err(Error::Contract(_))));
    }
}
