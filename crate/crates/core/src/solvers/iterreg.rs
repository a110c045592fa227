use super::{check_start, Method, SolverTrace, StopReason};
use crate::error::{contract, Result};
use crate::problem::{Problem, Vector};
use crate::regularization::IterRegSchedule;

/// Single-loop iterative regularization
/// `x_{k+1} = P[x_k - lambda_k (f'(x_k) + eps_k x_k)]`.
///
/// Row `k` of the trace holds `x_k` and the `eps_{k-1}` used to produce it.
pub fn run_iterreg(
    prob: &Problem,
    sched: &IterRegSchedule,
    x0: &Vector,
    max_iter: usize,
) -> Result<SolverTrace> {
    IterRegSchedule::new(sched.tau)?;
    check_start(prob, x0)?;
    if !prob.set.has_projection() {
        return Err(contract("iterative regularization requires a projection oracle"));
    }
    let mut trace = SolverTrace::new(Method::IterReg, x0.clone());
    let mut x = x0.clone();
    for k in 0..max_iter {
        let (lambda, eps) = sched.params(k);
        let g = prob.objective.gradient(&x) + &x * eps;
        x = prob.set.project(&(&x - g * lambda))?;
        trace.counters.gradient_evals += 1;
        trace.counters.projections += 1;
        trace.counters.inner_iterations += 1;
        trace.record_step(lambda);
        trace.push_record(prob, k + 1, Some(eps), None, 1, x.clone());
    }
    trace.final_point = x;
    trace.stop_reason = StopReason::MaxIter;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::BoxSet;
    use crate::problem::{LeastSquares, ZeroObjective};
    use nalgebra::{dmatrix, dvector};
    use std::sync::Arc;

    #[test]
    fn first_step_on_zero_objective() {
        let prob = Problem::new(
            Arc::new(ZeroObjective::new(2)),
            Arc::new(BoxSet::cube(2, 1.0, 2.0).unwrap()),
        )
        .unwrap();
        let sched = IterRegSchedule::new(0.25).unwrap();
        // lambda_0 = eps_0 = 1: P[(2,2) - (2,2)] = P[(0,0)] = (1,1).
        let trace = run_iterreg(&prob, &sched, &dvector![2.0, 2.0], 1).unwrap();
        assert_eq!(trace.final_point, dvector![1.0, 1.0]);
    }

    #[test]
    fn drifts_to_minimal_norm_solution() {
        let obj = LeastSquares::new(dmatrix![1.0, 1.0], dvector![1.0]).unwrap();
        let prob = Problem::new(Arc::new(obj), Arc::new(BoxSet::cube(2, -1.0, 1.0).unwrap()))
            .unwrap()
            .with_ground_truth(0.0, dvector![0.5, 0.5])
            .unwrap();
        let sched = IterRegSchedule::new(0.25).unwrap();
        let trace = run_iterreg(&prob, &sched, &dvector![1.0, 0.0], 10_000).unwrap();
        let dist = trace.outer.last().unwrap().dist_xstar.unwrap();
        assert!(dist < 0.1, "{dist}");
        assert_eq!(trace.outer.len(), 10_000);
    }

    #[test]
    fn tau_outside_interval_rejected() {
        let prob = Problem::new(
            Arc::new(ZeroObjective::new(1)),
            Arc::new(BoxSet::cube(1, 0.0, 1.0).unwrap()),
        )
        .unwrap();
        let bad = IterRegSchedule { tau: 0.6 };
        assert!(run_iterreg(&prob, &bad, &dvector![0.5], 1).is_err());
    }
}
