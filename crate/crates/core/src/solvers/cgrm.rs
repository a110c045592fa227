use super::{armijo_search, check_start, InnerStep, Method, MethodConstants, SolverTrace, StopPolicy, StopReason};
use crate::error::{contract, Error, Result};
use crate::problem::{Objective, Problem, Vector};
use crate::regularization::{GeometricSchedule, PerturbedObjective};

/// Two-level regularized conditional gradient.
///
/// Level `l` runs conditional gradient on `phi_{eps_l}` from `w_{l-1}`. With
/// `y` the LMO answer for `phi'(x)` and `d = y - x`, the gap
/// `mu = -<phi'(x), d>` ends the level once `mu <= delta_l` (then `w_l = x`);
/// otherwise `x <- x + lambda mu d` with the Armijo step of
/// [`armijo_search`] under the cap `lambda mu <= 1`.
pub fn run_cgrm(
    prob: &Problem,
    sched: &GeometricSchedule,
    consts: &MethodConstants,
    w0: &Vector,
    stop: &StopPolicy,
) -> Result<SolverTrace> {
    run_cgrm_observed(prob, sched, consts, w0, stop, &mut |_| {})
}

/// [`run_cgrm`] reporting every inner evaluation to `observer`.
pub fn run_cgrm_observed(
    prob: &Problem,
    sched: &GeometricSchedule,
    consts: &MethodConstants,
    w0: &Vector,
    stop: &StopPolicy,
    observer: &mut dyn FnMut(&InnerStep<'_>),
) -> Result<SolverTrace> {
    GeometricSchedule::new(sched.epsilon0, sched.nu, sched.sigma)?;
    stop.validate()?;
    if !prob.set.has_lmo() {
        return Err(contract("CGRM requires a linear minimization oracle"));
    }
    if prob.set.diameter().is_none() {
        return Err(contract("CGRM requires a bounded feasible set"));
    }
    check_start(prob, w0)?;
    let set = prob.set.as_ref();
    let mut trace = SolverTrace::new(Method::Cgrm, w0.clone());
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
        loop {
            let g = phi.gradient(&x);
            let y = set.lmo(&g)?;
            trace.counters.gradient_evals += 1;
            trace.counters.lmo_calls += 1;
            let d = &y - &x;
            let mu = -g.dot(&d);
            trace.gaps.push(mu);
            if mu <= delta {
                observer(&InnerStep {
                    level: l,
                    epsilon: eps,
                    delta,
                    k,
                    x: &x,
                    y: &y,
                    measure: mu,
                    lambda: None,
                });
                break;
            }
            if k >= stop.max_inner_per_l {
                return Err(Error::Runaway {
                    level: l,
                    cap: stop.max_inner_per_l,
                });
            }
            let dir = &d * mu;
            let step = armijo_search(
                &phi,
                &x,
                &dir,
                consts.beta,
                consts.theta,
                mu * mu,
                Some(mu),
                stop.max_linesearch_m,
            )?;
            observer(&InnerStep {
                level: l,
                epsilon: eps,
                delta,
                k,
                x: &x,
                y: &y,
                measure: mu,
                lambda: Some(step.lambda),
            });
            trace.counters.linesearch_trials += step.trials();
            trace.counters.inner_iterations += 1;
            trace.record_step(step.lambda);
            x += dir * step.lambda;
            k += 1;
        }
        trace.push_record(prob, l, Some(eps), Some(delta), k, x.clone());
        w = x;
        l += 1;
    }
    trace.final_point = w;
    Ok(trace)
}
