//! Measured iteration counts `N(alpha)` and their closed-form upper bounds.

use regrad::{GeometricSchedule, Method, MethodConstants, SolverTrace};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, BenchResult};

pub const DEFAULT_ALPHA_GRID: [f64; 5] = [0.1, 0.03, 0.01, 0.003, 0.001];

/// `C1` of the complexity bound. GPRM: `2 (L' + 1)^2 eps0^(1+2s) + 0.5 eps0 |x*|^2`;
/// CGRM: `eps0^(1+2s) + 0.5 eps0 |x*|^2`.
pub fn bound_c1(method: Method, sched: &GeometricSchedule, consts: &MethodConstants, xstar_norm: f64) -> BenchResult<f64> {
    let p = 1.0 + 2.0 * sched.sigma;
    let tail = 0.5 * sched.epsilon0 * xstar_norm * xstar_norm;
    match method {
        Method::Gprm => Ok(2.0 * (consts.lprime + 1.0).powi(2) * sched.epsilon0.powf(p) + tail),
        Method::Cgrm => Ok(sched.epsilon0.powf(p) + tail),
        other => Err(BenchError::config("method", format!("no complexity bound for `{other}`"))),
    }
}

/// `C2 = C1 / (beta gamma eps0^(2 (1 + sigma)))`.
pub fn bound_c2(c1: f64, sched: &GeometricSchedule, consts: &MethodConstants) -> f64 {
    c1 / (consts.beta * consts.gamma * sched.epsilon0.powf(2.0 * (1.0 + sched.sigma)))
}

/// `C2 ((C1 / alpha)^(1+2s) - 1) / (nu (1 - nu^(1+2s)))`, or 0 once `alpha >= C1`.
pub fn theoretical_bound(
    method: Method,
    sched: &GeometricSchedule,
    consts: &MethodConstants,
    xstar_norm: f64,
    alpha: f64,
) -> BenchResult<f64> {
    if !(alpha > 0.0) {
        return Err(BenchError::config("alpha", format!("must be positive, got {alpha}")));
    }
    let c1 = bound_c1(method, sched, consts, xstar_norm)?;
    if alpha >= c1 {
        return Ok(0.0);
    }
    let c2 = bound_c2(c1, sched, consts);
    let p = 1.0 + 2.0 * sched.sigma;
    Ok(c2 * ((c1 / alpha).powf(p) - 1.0) / (sched.nu * (1.0 - sched.nu.powf(p))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub alpha_grid: Vec<f64>,
    /// `None` where the trace ends before `Delta(w^l)` drops below `alpha`.
    pub measured_n: Vec<Option<u64>>,
    /// Empty until [`ComplexityReport::attach_bound`] is called.
    pub bound_n: Vec<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    /// Least-squares slope of `ln N` against `ln(1/alpha)`.
    pub fitted_exponent: Option<f64>,
    pub fit_points: usize,
}

impl ComplexityReport {
    pub fn attach_bound(
        &mut self,
        method: Method,
        sched: &GeometricSchedule,
        consts: &MethodConstants,
        xstar_norm: f64,
    ) -> BenchResult<()> {
        let c1 = bound_c1(method, sched, consts, xstar_norm)?;
        self.c1 = Some(c1);
        self.c2 = Some(bound_c2(c1, sched, consts));
        self.bound_n = self
            .alpha_grid
            .iter()
            .map(|&a| theoretical_bound(method, sched, consts, xstar_norm, a))
            .collect::<BenchResult<_>>()?;
        Ok(())
    }

    /// Grid points where a measured count exceeds its bound.
    pub fn bound_violations(&self) -> Vec<(f64, u64, f64)> {
        self.alpha_grid
            .iter()
            .zip(&self.measured_n)
            .zip(&self.bound_n)
            .filter_map(|((&a, &n), &b)| n.filter(|&n| n as f64 > b).map(|n| (a, n, b)))
            .collect()
    }
}

/// `N(alpha)` for each grid value: the inner iterations summed over levels
/// `1..=l(alpha)`, where `l(alpha)` is the last level with `Delta(w^l) >= alpha`.
pub fn measure_complexity(trace: &SolverTrace, alpha_grid: &[f64]) -> BenchResult<ComplexityReport> {
    let deltas = trace
        .outer
        .iter()
        .map(|r| r.delta_w)
        .collect::<Option<Vec<f64>>>()
        .ok_or_else(|| BenchError::Trace("complexity needs Delta(w^l) on every record (known f*)".into()))?;
    let inner: Vec<u64> = trace.outer.iter().map(|r| r.inner).collect();
    measure_counts(&deltas, &inner, alpha_grid)
}

/// [`measure_complexity`] on raw per-level columns.
pub fn measure_counts(delta_w: &[f64], inner: &[u64], alpha_grid: &[f64]) -> BenchResult<ComplexityReport> {
    if delta_w.len() != inner.len() {
        return Err(BenchError::Trace("Delta(w^l) and N_l columns differ in length".into()));
    }
    if alpha_grid.iter().any(|&a| !(a > 0.0)) {
        return Err(BenchError::config("alpha_grid", "values must be positive"));
    }
    if alpha_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(BenchError::config("alpha_grid", "values must be strictly decreasing"));
    }
    let cumulative: Vec<u64> = inner
        .iter()
        .scan(0u64, |acc, &n| {
            *acc += n;
            Some(*acc)
        })
        .collect();
    let measured_n: Vec<Option<u64>> = alpha_grid
        .iter()
        .map(|&alpha| match delta_w.iter().rposition(|&d| d >= alpha) {
            None => Some(0),
            Some(last) if last + 1 == delta_w.len() => None,
            Some(last) => Some(cumulative[last]),
        })
        .collect();
    let points: Vec<(f64, f64)> = alpha_grid
        .iter()
        .zip(&measured_n)
        .filter_map(|(&a, &n)| n.filter(|&n| n > 0).map(|n| ((1.0 / a).ln(), (n as f64).ln())))
        .collect();
    Ok(ComplexityReport {
        alpha_grid: alpha_grid.to_vec(),
        measured_n,
        bound_n: Vec::new(),
        c1: None,
        c2: None,
        fitted_exponent: slope(&points),
        fit_points: points.len(),
    })
}

fn slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
