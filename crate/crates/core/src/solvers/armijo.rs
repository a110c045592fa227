use crate::error::{contract, Error, Result};
use crate::problem::{Objective, Vector};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArmijoStep {
    pub m: u32,
    /// `theta^m`.
    pub lambda: f64,
}

impl ArmijoStep {
    /// Function evaluations spent, `m + 1`.
    pub fn trials(&self) -> u64 {
        u64::from(self.m) + 1
    }
}

/// Smallest `m >= 0` with
///
/// ```text
/// phi(x + theta^m dir) <= phi(x) - beta theta^m quad_coeff
/// ```
///
/// and, when `cap` is given, `theta^m cap <= 1`.
///
/// GPRM passes `dir = d`, `quad_coeff = |d|^2`, no cap. CGRM passes
/// `dir = mu d`, `quad_coeff = mu^2`, `cap = mu`.
#[allow(clippy::too_many_arguments)]
pub fn armijo_search(
    phi: &dyn Objective,
    x: &Vector,
    dir: &Vector,
    beta: f64,
    theta: f64,
    quad_coeff: f64,
    cap: Option<f64>,
    max_m: u32,
) -> Result<ArmijoStep> {
    if !(beta > 0.0 && beta < 1.0) || !(theta > 0.0 && theta < 1.0) {
        return Err(contract(format!(
            "line search needs beta, theta in (0, 1), got {beta}, {theta}"
        )));
    }
    if dir.len() != x.len() {
        return Err(contract("direction and point dimensions differ"));
    }
    if dir.iter().all(|&v| v == 0.0) {
        return Err(contract("line search direction is zero"));
    }
    let mut lambda = 1.0;
    for m in 0..=max_m {
        let capped = cap.is_none_or(|c| lambda * c <= 1.0);
        if capped && phi.value_change(x, &(dir * lambda)) <= -beta * lambda * quad_coeff {
            return Ok(ArmijoStep { m, lambda });
        }
        lambda *= theta;
    }
    Err(Error::LineSearch {
        trials: max_m + 1,
        last_step: lambda / theta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::FnObjective;
    use nalgebra::dvector;

    fn half_square() -> impl Objective {
        FnObjective::new(1, |x: &Vector| 0.5 * x[0] * x[0], |x: &Vector| x.clone(), 1.0)
    }

    /// Smallest passing exponent by direct evaluation of both sides.
    fn brute_force_m(beta: f64, theta: f64, x: f64, d: f64) -> Option<u32> {
        (0..=10).find(|&m| {
            let t = theta.powi(m as i32);
            0.5 * (x + t * d).powi(2) <= 0.5 * x * x - beta * t * d * d
        })
    }

    #[test]
    fn full_step_accepted_at_boundary() {
        let phi = half_square();
        let step = armijo_search(&phi, &dvector![1.0], &dvector![-1.0], 0.5, 0.5, 1.0, None, 60).unwrap();
        assert_eq!(brute_force_m(0.5, 0.5, 1.0, -1.0), Some(0));
        assert_eq!(step, ArmijoStep { m: 0, lambda: 1.0 });
    }

    #[test]
    fn several_reductions_needed() {
        let phi = half_square();
        let step = armijo_search(&phi, &dvector![1.0], &dvector![-1.0], 0.9, 0.5, 1.0, None, 60).unwrap();
        assert_eq!(brute_force_m(0.9, 0.5, 1.0, -1.0), Some(3));
        assert_eq!(step, ArmijoStep { m: 3, lambda: 0.125 });
        assert_eq!(step.trials(), 4);
    }

    #[test]
    fn cap_forces_reductions() {
        let phi = half_square();
        // theta^m * 3 <= 1 needs m >= 2 with theta = 0.5.
        let step = armijo_search(&phi, &dvector![1.0], &dvector![-0.1], 0.5, 0.5, 0.01, Some(3.0), 60).unwrap();
        assert_eq!(step.m, 2);
    }

    #[test]
    fn zero_direction_rejected() {
        let phi = half_square();
        let err = armijo_search(&phi, &dvector![1.0], &dvector![0.0], 0.5, 0.5, 0.0, None, 60).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn ascent_direction_exhausts_budget() {
        let phi = half_square();
        let err = armijo_search(&phi, &dvector![1.0], &dvector![1.0], 0.5, 0.5, 1.0, None, 20).unwrap_err();
        assert!(matches!(err, Error::LineSearch { trials: 21, .. }));
    }
}
