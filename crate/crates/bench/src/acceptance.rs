//! The acceptance suite: eleven pass/fail checks shared by `regrad verify`
//! and the `acceptance` test target.

use std::collections::HashMap;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regrad::regularization::{compare_path_points, tikhonov_solve, PathPoint, DEFAULT_ORACLE_TOL};
use regrad::{
    run_cgm, run_cgrm_observed, run_gpm, run_gprm_observed, BallSet, BoxSet, FeasibleSet, GeometricSchedule,
    InnerStep, Method, MethodConstants, Objective, PerturbedObjective, Problem, SimplexSet, SolverTrace, Vector,
};

use crate::complexity::{measure_complexity, DEFAULT_ALPHA_GRID};
use crate::config::ExperimentConfig;
use crate::error::{BenchError, BenchResult};
use crate::experiment::{run_experiment, ExperimentOutcome};
use crate::generators::{make_illposed_box, make_illposed_simplex, make_wellposed_box, make_wellposed_simplex};

/// Smallest regularization weight used by every two-level acceptance run.
pub const ACCEPT_EPSILON_MIN: f64 = 1e-4;
pub const SIGMAS: [f64; 3] = [1.0, 0.5, 0.25];
pub const STRONG_TOL: f64 = 5e-2;
pub const RUNTIME_LIMIT: Duration = Duration::from_secs(1);
pub const CERTIFICATE_SLACK: f64 = 1e-8;
pub const INNER_LIMIT: u64 = 1_000_000;
const SAMPLED_ITERATES: usize = 24;
const RANDOM_SEED: u64 = 20_240_601;

/// Half-decade grid from 1e-1 to 1e-8 for the exponent fits; every value is
/// reached by the `ACCEPT_EPSILON_MIN` runs on `illposed_box:2`.
pub fn trend_alpha_grid() -> Vec<f64> {
    (2..=16).map(|j| 10f64.powf(-(j as f64) / 2.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{mark}] {:>2}. {}: {}", self.id, self.title, self.detail)
    }
}

pub const TITLES: [&str; 11] = [
    "strong convergence, GPRM",
    "strong convergence, CGRM",
    "weak/strong contrast",
    "complexity bounds",
    "step lower bounds",
    "inner finiteness",
    "sandwich and gap certificates",
    "Tikhonov path inequalities",
    "baseline O(1/k) rates",
    "oracle invariants",
    "exponent trend in sigma",
];

/// Runs criterion `id` (1 to 11). Errors inside a check count as failures.
pub fn run_criterion(id: u8) -> CriterionOutcome {
    let result = match id {
        1 => strong_gprm(),
        2 => strong_cgrm(),
        3 => contrast(),
        4 => complexity_bounds(),
        5 => step_bounds(),
        6 => inner_finiteness(),
        7 => certificates(),
        8 => tikhonov_path(),
        9 => baseline_rates(),
        10 => oracle_invariants(),
        11 => exponent_trend(),
        _ => Err(BenchError::config("criterion", format!("no criterion {id}"))),
    };
    let title = TITLES.get(usize::from(id).wrapping_sub(1)).copied().unwrap_or("unknown");
    let (passed, detail) = match result {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionOutcome { id, title, passed, detail }
}

pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=11).map(run_criterion).collect()
}

type Check = BenchResult<(bool, String)>;

fn two_level_config(method: Method, label: &str, sigma: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(label, method);
    cfg.schedule.sigma = sigma;
    cfg.stop.epsilon_min = ACCEPT_EPSILON_MIN;
    cfg
}

fn final_dist(trace: &SolverTrace) -> f64 {
    trace.outer.last().and_then(|r| r.dist_xstar).unwrap_or(f64::INFINITY)
}

fn strong(method: Method, label: &str) -> Check {
    let start = Instant::now();
    let out = run_experiment(&two_level_config(method, label, 0.5))?;
    let elapsed = start.elapsed();
    let dist = final_dist(&out.trace);
    Ok((
        dist < STRONG_TOL && elapsed < RUNTIME_LIMIT,
        format!(
            "{label} from {:?}: |w - x*_n| = {dist:.3e} (< {STRONG_TOL}), {} levels, runtime {elapsed:.2?} (< 1 s)",
            out.generated.default_start.as_slice(),
            out.trace.outer.len()
        ),
    ))
}

fn strong_gprm() -> Check {
    strong(Method::Gprm, "illposed_box:2")
}

fn strong_cgrm() -> Check {
    strong(Method::Cgrm, "illposed_simplex:3")
}

fn contrast() -> Check {
    let gp = make_illposed_box(2)?;
    let x0 = Vector::from_vec(vec![1.0, 0.0]);
    let gpm = run_gpm(&gp.problem, 1.0 / gp.analytic_l, &x0, 1000)?;
    let gpm_dist = final_dist(&gpm);
    let (gprm_ok, gprm_detail) = strong_gprm()?;
    Ok((
        gpm_dist >= 0.7 && gprm_ok,
        format!("GPM ends at distance {gpm_dist:.4} (>= 0.7); GPRM: {gprm_detail}"),
    ))
}

/// GPRM and CGRM on both ill-posed generators for every sigma.
fn bundled_runs() -> BenchResult<Vec<ExperimentOutcome>> {
    let mut runs = Vec::new();
    for method in [Method::Gprm, Method::Cgrm] {
        for label in ["illposed_box:2", "illposed_simplex:3"] {
            for sigma in SIGMAS {
                runs.push(run_experiment(&two_level_config(method, label, sigma))?);
            }
        }
    }
    Ok(runs)
}

fn run_name(o: &ExperimentOutcome) -> String {
    format!("{} {} s={}", o.config.method, o.config.problem_label, o.config.schedule.sigma)
}

fn complexity_bounds() -> Check {
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut tightest = f64::INFINITY;
    for o in bundled_runs()? {
        let method = o.trace.method;
        let consts = o.constants.expect("two-level run has constants");
        let mut report = measure_complexity(&o.trace, &DEFAULT_ALPHA_GRID)?;
        report.attach_bound(method, &o.config.geometric_schedule()?, &consts, o.generated.analytic_xstar_n.norm())?;
        for ((&n, &b), &a) in report.measured_n.iter().zip(&report.bound_n).zip(&report.alpha_grid) {
            if let Some(n) = n {
                checked += 1;
                if n > 0 {
                    tightest = tightest.min(b / n as f64);
                }
                if n as f64 > b {
                    failures.push(format!("{} alpha={a}: N={n} > {b:.3e}", run_name(&o)));
                }
            }
        }
    }
    Ok((
        failures.is_empty() && checked > 0,
        if failures.is_empty() {
            format!("12 runs, {checked} attained (alpha, N) points, all N <= bound (smallest bound/N = {tightest:.3e})")
        } else {
            failures.join("; ")
        },
    ))
}

fn step_bounds() -> Check {
    let mut worst = f64::INFINITY;
    let mut failures = Vec::new();
    for o in bundled_runs()? {
        let gamma = o.constants.expect("two-level run has constants").gamma;
        let lam = o.trace.min_observed_lambda;
        if lam.is_finite() {
            worst = worst.min(lam / gamma);
        }
        if lam < gamma {
            failures.push(format!("{}: min lambda {lam:e} < gamma {gamma:e}", run_name(&o)));
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("12 runs, min over runs of lambda_min / gamma = {worst:.3}")
        } else {
            failures.join("; ")
        },
    ))
}

fn inner_finiteness() -> Check {
    let runs = bundled_runs()?;
    let levels: usize = runs.iter().map(|o| o.trace.outer.len()).sum();
    let (max, name) = runs
        .iter()
        .flat_map(|o| o.trace.outer.iter().map(move |r| (r.inner, run_name(o))))
        .max_by_key(|(n, _)| *n)
        .unwrap_or((0, String::new()));
    Ok((
        max < INNER_LIMIT,
        format!("{levels} levels over 12 runs, largest N_l = {max} ({name}) < 1e6"),
    ))
}

struct Sample {
    epsilon: f64,
    x: Vector,
    y: Vector,
    measure: f64,
}

fn sample_run(method: Method, gp_problem: &Problem, w0: &Vector) -> BenchResult<(Vec<Sample>, MethodConstants)> {
    let sched = GeometricSchedule::default();
    let stop = regrad::StopPolicy {
        epsilon_min: ACCEPT_EPSILON_MIN,
        ..Default::default()
    };
    let mut all = Vec::new();
    let mut observer = |s: &InnerStep<'_>| {
        all.push(Sample {
            epsilon: s.epsilon,
            x: s.x.clone(),
            y: s.y.clone(),
            measure: s.measure,
        })
    };
    let consts = match method {
        Method::Gprm => {
            let c = MethodConstants::gprm(0.5, 0.5, gp_problem.lipschitz(), sched.epsilon0)?;
            run_gprm_observed(gp_problem, &sched, &c, w0, &stop, &mut observer)?;
            c
        }
        _ => {
            let c = MethodConstants::cgrm_for(gp_problem, 0.5, 0.5, sched.epsilon0, w0)?;
            run_cgrm_observed(gp_problem, &sched, &c, w0, &stop, &mut observer)?;
            c
        }
    };
    let stride = (all.len() / SAMPLED_ITERATES).max(1);
    let picked = all.into_iter().step_by(stride).collect();
    Ok((picked, consts))
}

fn certificates() -> Check {
    let mut details = Vec::new();
    let mut ok = true;
    for method in [Method::Gprm, Method::Cgrm] {
        let gp = if method == Method::Gprm {
            make_illposed_box(2)?
        } else {
            make_illposed_simplex(3)?
        };
        let prob = &gp.problem;
        let (samples, consts) = sample_run(method, prob, &gp.default_start)?;
        let mut oracle: HashMap<u64, (Vector, f64)> = HashMap::new();
        let mut worst = f64::INFINITY;
        for s in &samples {
            if let std::collections::hash_map::Entry::Vacant(e) = oracle.entry(s.epsilon.to_bits()) {
                let rec = tikhonov_solve(prob, s.epsilon, DEFAULT_ORACLE_TOL)?;
                e.insert((rec.z, rec.value));
            }
            let (z, phistar) = &oracle[&s.epsilon.to_bits()];
            let phi = PerturbedObjective::new(prob.objective.as_ref(), s.epsilon, 1.0)?;
            // GPRM certifies the projected point y, CGRM the iterate x.
            let point = if method == Method::Gprm { &s.y } else { &s.x };
            let excess = phi.value(point) - phistar;
            let dz = (point - z).norm();
            let lower = excess - 0.5 * s.epsilon * dz * dz;
            let upper_rhs = if method == Method::Gprm {
                (consts.lprime + 1.0) * (&s.y - &s.x).norm() * dz
            } else {
                s.measure
            };
            let upper = upper_rhs - excess;
            worst = worst.min(lower).min(upper);
            ok &= lower >= -CERTIFICATE_SLACK && upper >= -CERTIFICATE_SLACK;
        }
        ok &= samples.len() >= 10;
        details.push(format!(
            "{method} on {}: {} iterates over {} levels, min slack {worst:.2e}",
            gp.label,
            samples.len(),
            oracle.len()
        ));
    }
    Ok((ok, details.join("; ")))
}

fn tikhonov_path() -> Check {
    let grid: Vec<f64> = (0..=10).map(|i| 0.5f64.powi(i)).collect();
    let mut ok = true;
    let mut details = Vec::new();
    for gp in [make_illposed_box(2)?, make_illposed_simplex(3)?] {
        let prob = &gp.problem;
        let mut points = vec![PathPoint::minimal_norm(prob)?];
        for &eps in grid.iter().rev() {
            points.push(PathPoint::from_record(prob, &tikhonov_solve(prob, eps, DEFAULT_ORACLE_TOL)?));
        }
        let mut pairs = 0;
        let mut worst = f64::INFINITY;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let r = compare_path_points(&points[i], &points[j], CERTIFICATE_SLACK)?;
                pairs += 1;
                worst = worst.min(r.value_slack).min(r.optimal_value_slack).min(r.norm_slack);
                ok &= r.all_hold();
            }
        }
        let end = (&points[1].z - &gp.analytic_xstar_n).norm();
        ok &= end < 1e-2;
        details.push(format!(
            "{}: {pairs} pairs, min slack {worst:.2e}, |z(2^-10) - x*_n| = {end:.2e}",
            gp.label
        ));
    }
    Ok((ok, details.join("; ")))
}

/// Largest `k Delta(x^k)` over `lo <= k < hi`, holding the last iterate
/// fixed once a run stops early.
fn max_scaled_gap(trace: &SolverTrace, fstar: f64, obj: &dyn Objective, x0: &Vector, lo: usize, hi: usize) -> f64 {
    let mut last = obj.value(x0) - fstar;
    let mut best: f64 = 0.0;
    for k in 1..hi {
        if let Some(r) = trace.outer.get(k - 1) {
            last = r.delta_w.unwrap_or_else(|| obj.value(&r.w) - fstar);
        }
        if k >= lo {
            best = best.max(k as f64 * last);
        }
    }
    best
}

fn baseline_rates() -> Check {
    const ITERS: usize = 10_000;
    let mut ok = true;
    let mut details = Vec::new();
    for (method, gp) in [(Method::Gpm, make_wellposed_box(3)?), (Method::Cgm, make_wellposed_simplex(3)?)] {
        let prob = &gp.problem;
        let x0 = &gp.default_start;
        let step = 1.0 / gp.analytic_l;
        let trace = if method == Method::Gpm {
            run_gpm(prob, step, x0, ITERS)?
        } else {
            run_cgm(prob, step, x0, ITERS)?
        };
        let obj = prob.objective.as_ref();
        let m1 = max_scaled_gap(&trace, gp.analytic_fstar, obj, x0, 100, 1000);
        let m2 = max_scaled_gap(&trace, gp.analytic_fstar, obj, x0, 1000, ITERS + 1);
        let pass = m1.is_finite() && m2.is_finite() && m2 <= 2.0 * m1;
        ok &= pass;
        details.push(format!(
            "{method} on {}: max kDelta over [100,1000) = {m1:.3e}, over [1000,1e4] = {m2:.3e}",
            gp.label
        ));
    }
    Ok((ok, details.join("; ")))
}

fn random_vec(rng: &mut ChaCha8Rng, dim: usize, scale: f64) -> Vector {
    Vector::from_fn(dim, |_, _| rng.random_range(-scale..scale))
}

/// Uniform feasible samples: boxes coordinate-wise, balls by radius
/// `r u^(1/n)`, simplices by normalized exponentials (flat Dirichlet).
enum Sampler {
    Box(BoxSet),
    Ball(BallSet),
    Simplex(SimplexSet),
}

impl Sampler {
    fn set(&self) -> &dyn FeasibleSet {
        match self {
            Sampler::Box(s) => s,
            Sampler::Ball(s) => s,
            Sampler::Simplex(s) => s,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> Vector {
        match self {
            Sampler::Box(b) => Vector::from_fn(b.lower().len(), |i, _| rng.random_range(b.lower()[i]..=b.upper()[i])),
            Sampler::Ball(b) => {
                let n = b.center().len();
                let dir = loop {
                    let v = random_vec(rng, n, 1.0);
                    let norm = v.norm();
                    if norm > 1e-3 && norm <= 1.0 {
                        break v / norm;
                    }
                };
                let r = b.radius() * rng.random::<f64>().powf(1.0 / n as f64);
                b.center() + dir * r
            }
            Sampler::Simplex(s) => {
                let e = Vector::from_fn(s.dim(), |_, _| -(1.0 - rng.random::<f64>()).ln());
                let total = e.sum();
                e / total
            }
        }
    }
}

fn oracle_invariants() -> Check {
    const DIM: usize = 5;
    const SAMPLES: usize = 100;
    const FEASIBLE: usize = 50;
    let mut rng = ChaCha8Rng::seed_from_u64(RANDOM_SEED);
    let lower = random_vec(&mut rng, DIM, 2.0);
    let upper = Vector::from_fn(DIM, |i, _| lower[i] + rng.random_range(0.1..3.0));
    let samplers = [
        Sampler::Box(BoxSet::new(lower, upper)?),
        Sampler::Ball(BallSet::new(random_vec(&mut rng, DIM, 1.0), 1.7)?),
        Sampler::Simplex(SimplexSet::new(DIM)?),
    ];
    let mut failures = Vec::new();
    for sampler in &samplers {
        let set = sampler.set();
        let mut counts = [0usize; 5];
        for _ in 0..SAMPLES {
            let x = random_vec(&mut rng, DIM, 10.0);
            let y = random_vec(&mut rng, DIM, 10.0);
            let g = random_vec(&mut rng, DIM, 3.0);
            let px = set.project(&x)?;
            let py = set.project(&y)?;
            if (set.project(&px)? - &px).norm() > 1e-12 {
                counts[0] += 1;
            }
            if (&px - &py).norm() > (&x - &y).norm() + 1e-12 {
                counts[1] += 1;
            }
            let s = set.lmo(&g)?;
            for _ in 0..FEASIBLE {
                let q = sampler.sample(&mut rng);
                if (&x - &px).dot(&(&q - &px)) > 1e-10 {
                    counts[2] += 1;
                }
                if g.dot(&s) > g.dot(&q) + 1e-10 {
                    counts[3] += 1;
                }
            }
            let extreme = match sampler {
                Sampler::Box(b) => s.iter().enumerate().all(|(i, &v)| v == b.lower()[i] || v == b.upper()[i]),
                Sampler::Simplex(_) => s.iter().filter(|&&v| v == 1.0).count() == 1 && s.iter().filter(|&&v| v == 0.0).count() == DIM - 1,
                Sampler::Ball(_) => true,
            };
            if !extreme || !set.contains(&s, regrad::MEMBERSHIP_TOL) {
                counts[4] += 1;
            }
        }
        if counts.iter().any(|&c| c > 0) {
            failures.push(format!(
                "{}: idempotence {}, non-expansive {}, variational {}, lmo optimal {}, lmo extreme {}",
                set.fingerprint(),
                counts[0],
                counts[1],
                counts[2],
                counts[3],
                counts[4]
            ));
        }
    }
    Ok((
        failures.is_empty(),
        if failures.is_empty() {
            format!("box, ball, simplex in dim {DIM}: {SAMPLES} points each, {FEASIBLE} feasible comparisons per point, no violations")
        } else {
            failures.join("; ")
        },
    ))
}

fn exponent_trend() -> Check {
    let grid = trend_alpha_grid();
    let mut exps = Vec::new();
    let mut parts = Vec::new();
    let mut enough_points = true;
    for sigma in SIGMAS {
        let out = run_experiment(&two_level_config(Method::Gprm, "illposed_box:2", sigma))?;
        let report = measure_complexity(&out.trace, &grid)?;
        enough_points &= report.fit_points >= 4;
        let e = report.fitted_exponent.unwrap_or(f64::NAN);
        parts.push(format!("sigma={sigma}: {e:.3} ({} points)", report.fit_points));
        exps.push(e);
    }
    let monotone = exps.windows(2).all(|w| w[1] <= w[0]);
    Ok((
        enough_points && monotone,
        format!(
            "GPRM on illposed_box:2, fitted exponents {}; {}",
            parts.join(", "),
            if monotone { "non-increasing" } else { "NOT non-increasing" }
        ),
    ))
}
