use super::{armijo_search, check_start, InnerStep, Method, MethodConstants, SolverTrace, StopPolicy, StopReason};
use crate::error::{contract, Error, Result};
use crate::problem::{Objective, Problem, Vector};
use crate::regularization::{GeometricSchedule, PerturbedObjective};

/// Two-level regularized gradient projection.
///
/// Level `l = 1, 2, ...` minimizes `phi_{eps_l}` by gradient projection with
/// Armijo steps, warm-started at `w_{l-1}`. The level ends as soon as the
/// projected point `y = P[x - phi'(x)]` satisfies `|x - y| <= delta_l`; `w_l`
/// is whichever of `x`, `y` has the smaller `phi_{eps_l}` (ties go to `y`).
pub fn run_gprm(
    prob: &Problem,
    sched: &GeometricSchedule,
    consts: &MethodConstants,
    w0: &Vector,
    stop: &StopPolicy,
) -> Result<SolverTrace> {
    run_gprm_observed(prob, sched, consts, w0, stop, &mut |_| {})
}

/// [`run_gprm`] reporting every inner evaluation to `observer`.
pub fn run_gprm_observed(
    prob: &Problem,
    sched: &GeometricSchedule,
    consts: &MethodConstants,
    w0: &Vector,
    stop: &StopPolicy,
    observer: &mut dyn FnMut(&InnerStep<'_>),
) -> Result<SolverTrace> {
    GeometricSchedule::new(sched.epsilon0, sched.nu, sched.sigma)?;
    stop.validate()?;
    check_start(prob, w0)?;
    if !prob.set.has_projection() {
        return Err(contract("GPRM requires a projection oracle"));
    }
    let set = prob.set.as_ref();
    let mut trace = SolverTrace::new(Method::Gprm, w0.clone());
    let mut w = w0.clone();
    let mut l = 1;
    loop {
        let (eps, delta) = sched.params(l);
        if eps < stop.epsilon_min {
            trace.stop_reason = StopReason::EpsilonMin;
            break;
        }
        if l > stop.max_outer {
            trace.stop_reason = StopReason::MaxOuter;
            break;
        }
        let phi = PerturbedObjective::new(prob.objective.as_ref(), eps, sched.epsilon0)?;
        let mut x = w;
        let mut k: u64 = 0;
        let next = loop {
            let g = phi.gradient(&x);
            let y = set.project(&(&x - &g))?;
            trace.counters.gradient_evals += 1;
            trace.counters.projections += 1;
            let d = &y - &x;
            let dist = d.norm();
            if dist <= delta {
                observer(&InnerStep {
                    level: l,
                    epsilon: eps,
                    delta,
                    k,
                    x: &x,
                    y: &y,
                    measure: dist,
                    lambda: None,
                });
                break if phi.value(&x) < phi.value(&y) { x } else { y };
            }
            if k >= stop.max_inner_per_l {
                return Err(Error::Runaway {
                    level: l,
                    cap: stop.max_inner_per_l,
                });
            }
            let step = armijo_search(
                &phi,
                &x,
                &d,
                consts.beta,
                consts.theta,
                dist * dist,
                None,
                stop.max_linesearch_m,
            )?;
            observer(&InnerStep {
                level: l,
                epsilon: eps,
                delta,
                k,
                x: &x,
                y: &y,
                measure: dist,
                lambda: Some(step.lambda),
            });
            trace.counters.linesearch_trials += step.trials();
            trace.counters.inner_iterations += 1;
            trace.record_step(step.lambda);
            x += d * step.lambda;
            k += 1;
        };
        trace.push_record(prob, l, Some(eps), Some(delta), k, next.clone());
        w = next;
        l += 1;
    }
    trace.final_point = w;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::BoxSet;
    use crate::problem::{LeastSquares, ZeroObjective};
    use crate::regularization::{tikhonov_solve, DEFAULT_ORACLE_TOL};
    use nalgebra::{dmatrix, dvector};
    use std::sync::Arc;

    fn illposed_box2() -> Problem {
        let obj = LeastSquares::new(dmatrix![1.0, 1.0], dvector![1.0]).unwrap().with_lipschitz(2.0);
        Problem::new(Arc::new(obj), Arc::new(BoxSet::cube(2, -1.0, 1.0).unwrap()))
            .unwrap()
            .with_ground_truth(0.0, dvector![0.5, 0.5])
            .unwrap()
    }

    fn stop_at(epsilon_min: f64) -> StopPolicy {
        StopPolicy {
            epsilon_min,
            ..StopPolicy::default()
        }
    }

    #[test]
    fn converges_to_minimal_norm_solution() {
        let prob = illposed_box2();
        let sched = GeometricSchedule::new(1.0, 0.5, 0.5).unwrap();
        let consts = MethodConstants::gprm(0.5, 0.5, prob.lipschitz(), 1.0).unwrap();
        let trace = run_gprm(&prob, &sched, &consts, &dvector![1.0, 0.0], &stop_at(1e-4)).unwrap();
        let last = trace.outer.last().unwrap();
        assert!(last.dist_xstar.unwrap() < 5e-2);
        assert_eq!(trace.stop_reason, StopReason::EpsilonMin);
        // eps_l = 2^-l >= 1e-4 for l <= 13.
        assert_eq!(trace.outer.len(), 13);

        // The tolerance above is loose: the regularized solution at the final
        // weight is itself within 1e-4 of x*_n.
        let z = tikhonov_solve(&prob, last.epsilon.unwrap(), DEFAULT_ORACLE_TOL).unwrap();
        assert!((&z.z - dvector![0.5, 0.5]).norm() < 1e-4);
        assert!(trace.total_inner() == trace.counters.inner_iterations);
        assert!(trace.min_observed_lambda >= consts.gamma);
    }

    #[test]
    fn zero_objective_goes_to_minimal_norm_point() {
        let prob = Problem::new(
            Arc::new(ZeroObjective::new(2)),
            Arc::new(BoxSet::cube(2, 1.0, 2.0).unwrap()),
        )
        .unwrap();
        let sched = GeometricSchedule::default();
        let consts = MethodConstants::gprm(0.5, 0.5, 0.0, 1.0).unwrap();
        let trace = run_gprm(&prob, &sched, &consts, &dvector![2.0, 1.5], &stop_at(1e-3)).unwrap();
        assert!((&trace.final_point - dvector![1.0, 1.0]).norm() < 1e-6);
    }

    #[test]
    fn level_already_satisfied_records_zero_inner() {
        // Starting at z(eps) of a constant path, every level stops at k = 0.
        let prob = Problem::new(
            Arc::new(ZeroObjective::new(2)),
            Arc::new(BoxSet::cube(2, 1.0, 2.0).unwrap()),
        )
        .unwrap();
        let consts = MethodConstants::gprm(0.5, 0.5, 0.0, 1.0).unwrap();
        let trace = run_gprm(&prob, &GeometricSchedule::default(), &consts, &dvector![1.0, 1.0], &stop_at(1e-2)).unwrap();
        assert!(trace.outer.iter().all(|r| r.inner == 0));
        assert!(trace.min_observed_lambda.is_infinite());
    }

    #[test]
    fn every_level_finishes() {
        let prob = illposed_box2();
        let consts = MethodConstants::gprm(0.5, 0.5, 2.0, 1.0).unwrap();
        let trace = run_gprm(&prob, &GeometricSchedule::default(), &consts, &dvector![-1.0, 1.0], &stop_at(1e-5)).unwrap();
        assert!(trace.outer.iter().all(|r| r.inner < 1_000_000));
    }

    #[test]
    fn inner_cap_breach_is_runaway() {
        let prob = illposed_box2();
        let consts = MethodConstants::gprm(0.5, 0.5, 2.0, 1.0).unwrap();
        let stop = StopPolicy {
            epsilon_min: 1e-6,
            max_inner_per_l: 1,
            ..StopPolicy::default()
        };
        let err = run_gprm(&prob, &GeometricSchedule::default(), &consts, &dvector![1.0, 0.0], &stop).unwrap_err();
        assert!(matches!(err, Error::Runaway { cap: 1, .. }));
    }

    #[test]
    fn infeasible_start_rejected() {
        let prob = illposed_box2();
        let consts = MethodConstants::gprm(0.5, 0.5, 2.0, 1.0).unwrap();
        let err = run_gprm(&prob, &GeometricSchedule::default(), &consts, &dvector![2.0, 0.0], &StopPolicy::default()).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn step_bound_constant() {
        // gamma = min{1, theta * 2 (1 - beta) / L'} with L' = 2 + 1.
        let c = MethodConstants::gprm(0.5, 0.5, 2.0, 1.0).unwrap();
        assert!((c.gamma - 1.0 / 6.0).abs() < 1e-16);
        let c = MethodConstants::gprm(0.1, 0.9, 0.0, 0.5).unwrap();
        assert_eq!(c.gamma, 1.0);
    }
}
