//! Test problems with known minimal-norm solutions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regrad::{BoxSet, FeasibleSet, LeastSquares, Objective, Problem, SimplexSet, Vector};

use crate::error::{BenchError, BenchResult};

/// A problem together with the analytic facts used to grade solvers.
#[derive(Debug, Clone)]
pub struct GeneratedProblem {
    pub problem: Problem,
    pub label: String,
    pub analytic_l: f64,
    pub analytic_xstar_n: Vector,
    pub analytic_fstar: f64,
    pub dstar_description: String,
    /// A feasible solution of the unperturbed problem other than `x*_n` where
    /// one exists, otherwise a vertex.
    pub default_start: Vector,
}

impl GeneratedProblem {
    fn assemble(
        label: String,
        objective: LeastSquares,
        set: Arc<dyn FeasibleSet>,
        xstar: Vector,
        dstar_description: String,
        default_start: Vector,
    ) -> BenchResult<Self> {
        let analytic_l = objective.lipschitz();
        let fstar = objective.value(&xstar);
        let problem = Problem::new(Arc::new(objective), set)?.with_ground_truth(fstar, xstar.clone())?;
        Ok(Self {
            problem,
            label,
            analytic_l,
            analytic_xstar_n: xstar,
            analytic_fstar: fstar,
            dstar_description,
            default_start,
        })
    }
}

fn unit(dim: usize, i: usize) -> Vector {
    let mut e = Vector::zeros(dim);
    e[i] = 1.0;
    e
}

/// `f(x) = 0.5 (sum x_i - 1)^2` on `[-1, 1]^dim`.
pub fn make_illposed_box(dim: usize) -> BenchResult<GeneratedProblem> {
    if dim < 2 {
        return Err(BenchError::Generator(format!("illposed_box needs dim >= 2, got {dim}")));
    }
    let a = DMatrix::from_element(1, dim, 1.0);
    let objective = LeastSquares::new(a, DVector::from_element(1, 1.0))?.with_lipschitz(dim as f64);
    GeneratedProblem::assemble(
        format!("illposed_box:{dim}"),
        objective,
        Arc::new(BoxSet::cube(dim, -1.0, 1.0)?),
        Vector::from_element(dim, 1.0 / dim as f64),
        "{x in [-1,1]^n : sum x_i = 1}".into(),
        unit(dim, 0),
    )
}

/// `f(x) = 0.5 (x_1 - x_2)^2` on the unit simplex.
pub fn make_illposed_simplex(dim: usize) -> BenchResult<GeneratedProblem> {
    if dim < 3 {
        return Err(BenchError::Generator(format!("illposed_simplex needs dim >= 3, got {dim}")));
    }
    let mut a = DMatrix::zeros(1, dim);
    a[(0, 0)] = 1.0;
    a[(0, 1)] = -1.0;
    let objective = LeastSquares::new(a, DVector::zeros(1))?.with_lipschitz(2.0);
    let set = SimplexSet::new(dim)?;
    GeneratedProblem::assemble(
        format!("illposed_simplex:{dim}"),
        objective,
        Arc::new(set),
        set.barycenter(),
        "{x in simplex : x_1 = x_2}".into(),
        unit(dim, 0),
    )
}

/// Separable `0.5 sum d_i (x_i - c_i)^2` on `[-1, 1]^dim` with weights from 1
/// down to 1e-3; the first target lies outside the box.
pub fn make_wellposed_box(dim: usize) -> BenchResult<GeneratedProblem> {
    if dim < 2 {
        return Err(BenchError::Generator(format!("wellposed_box needs dim >= 2, got {dim}")));
    }
    let weights: Vec<f64> = (0..dim).map(|i| 10f64.powf(-3.0 * i as f64 / (dim - 1) as f64)).collect();
    let mut c = Vector::from_element(dim, 0.5);
    c[0] = 2.0;
    let a = DMatrix::from_diagonal(&DVector::from_iterator(dim, weights.iter().map(|w| w.sqrt())));
    let b = &a * &c;
    let objective = LeastSquares::new(a, b)?.with_lipschitz(1.0);
    let mut xstar = c.clone();
    xstar[0] = 1.0;
    GeneratedProblem::assemble(
        format!("wellposed_box:{dim}"),
        objective,
        Arc::new(BoxSet::cube(dim, -1.0, 1.0)?),
        xstar,
        "singleton {(1, 0.5, ..., 0.5)}".into(),
        Vector::from_element(dim, -1.0),
    )
}

/// `0.5 |x - c|^2` on the unit simplex with `c = (0.6, 0.4, -0.5, ...)`, whose
/// minimizer `(0.6, 0.4, 0, ...)` sits inside an edge. Starts at the
/// barycenter, so conditional gradient never reaches the edge exactly.
pub fn make_wellposed_simplex(dim: usize) -> BenchResult<GeneratedProblem> {
    if dim < 3 {
        return Err(BenchError::Generator(format!("wellposed_simplex needs dim >= 3, got {dim}")));
    }
    let mut c = Vector::from_element(dim, -0.5);
    c[0] = 0.6;
    c[1] = 0.4;
    let objective = LeastSquares::new(DMatrix::identity(dim, dim), c)?.with_lipschitz(1.0);
    let mut xstar = Vector::zeros(dim);
    xstar[0] = 0.6;
    xstar[1] = 0.4;
    GeneratedProblem::assemble(
        format!("wellposed_simplex:{dim}"),
        objective,
        Arc::new(SimplexSet::new(dim)?),
        xstar,
        "singleton {(0.6, 0.4, 0, ..., 0)}".into(),
        Vector::from_element(dim, 1.0 / dim as f64),
    )
}

/// Seeded rank-`dim/2` least squares on `[-1, 1]^dim`, consistent with a
/// point inside the box.
pub fn make_rankdef_box(dim: usize, seed: u64) -> BenchResult<GeneratedProblem> {
    if dim < 2 {
        return Err(BenchError::Generator(format!("rankdef_box needs dim >= 2, got {dim}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = random_low_rank(&mut rng, dim);
    let x_true = DVector::from_fn(dim, |_, _| rng.random_range(-0.5..0.5));
    let b = &a * x_true;
    let mut gp = make_rankdef_lsq(a, b, Arc::new(BoxSet::cube(dim, -1.0, 1.0)?))?;
    gp.label = format!("rankdef_box:{dim}");
    Ok(gp)
}

fn random_low_rank(rng: &mut ChaCha8Rng, dim: usize) -> DMatrix<f64> {
    let rank = dim / 2;
    let left = DMatrix::from_fn(dim, rank, |_, _| rng.random_range(-1.0..1.0));
    let right = DMatrix::from_fn(rank, dim, |_, _| rng.random_range(-1.0..1.0));
    left * right
}

/// `0.5 |Ax - b|^2` over `set`, with `x*_n` from [`minimal_norm_oracle`].
pub fn make_rankdef_lsq(a: DMatrix<f64>, b: Vector, set: Arc<dyn FeasibleSet>) -> BenchResult<GeneratedProblem> {
    if !set.has_projection() {
        return Err(BenchError::Generator("rankdef_lsq needs a projection oracle".into()));
    }
    let objective = LeastSquares::new(a.clone(), b.clone())?;
    let xstar = cached_minimal_norm(&a, &b, set.as_ref())?;
    let start = set.project(&Vector::from_element(set.dim(), 10.0))?;
    GeneratedProblem::assemble(
        format!("rankdef_lsq:{}x{}", a.nrows(), a.ncols()),
        objective,
        set,
        xstar,
        "{x in D : Ax = A x_hat} for any minimizer x_hat".into(),
        start,
    )
}

/// Parses `name:dim` labels such as `illposed_box:2`.
pub fn problem_by_label(label: &str, seed: u64) -> BenchResult<GeneratedProblem> {
    let (name, dim) = label
        .split_once(':')
        .ok_or_else(|| BenchError::Generator(format!("problem label `{label}` is not of the form name:dim")))?;
    let dim: usize = dim
        .parse()
        .map_err(|_| BenchError::Generator(format!("bad dimension in problem label `{label}`")))?;
    match name {
        "illposed_box" => make_illposed_box(dim),
        "illposed_simplex" => make_illposed_simplex(dim),
        "wellposed_box" => make_wellposed_box(dim),
        "wellposed_simplex" => make_wellposed_simplex(dim),
        "rankdef_box" => make_rankdef_box(dim, seed),
        _ => Err(BenchError::Generator(format!(
            "unknown problem `{name}` (expected illposed_box, illposed_simplex, wellposed_box, wellposed_simplex or rankdef_box)"
        ))),
    }
}

const ORACLE_TOL: f64 = 1e-12;
const ORACLE_MAX_ITER: usize = 5_000_000;
const AGREEMENT_TOL: f64 = 1e-8;

type TruthCache = Mutex<HashMap<String, Vector>>;

fn truth_cache() -> &'static TruthCache {
    static CACHE: OnceLock<TruthCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cache_key(a: &DMatrix<f64>, b: &Vector, set: &dyn FeasibleSet) -> String {
    let mut key = format!("{}x{}|", a.nrows(), a.ncols());
    for v in a.iter().chain(b.iter()) {
        let _ = write!(key, "{:x},", v.to_bits());
    }
    key.push('|');
    key.push_str(&set.fingerprint());
    key
}

fn cached_minimal_norm(a: &DMatrix<f64>, b: &Vector, set: &dyn FeasibleSet) -> BenchResult<Vector> {
    let key = cache_key(a, b, set);
    if let Some(x) = truth_cache().lock().expect("truth cache poisoned").get(&key) {
        return Ok(x.clone());
    }
    let x = minimal_norm_oracle(a, b, set)?;
    truth_cache().lock().expect("truth cache poisoned").insert(key, x.clone());
    Ok(x)
}

/// Minimal-norm minimizer of `0.5 |Ax - b|^2` over `set`, computed twice from
/// different starting points.
///
/// Each pass finds a minimizer `x_hat` by projected gradient, then projects
/// the origin onto `set ∩ {x : Ax = A x_hat}` with Dykstra's alternating
/// scheme. The passes must agree to 1e-8.
pub fn minimal_norm_oracle(a: &DMatrix<f64>, b: &Vector, set: &dyn FeasibleSet) -> BenchResult<Vector> {
    let dim = a.ncols();
    let pinv = a
        .clone()
        .pseudo_inverse(1e-12)
        .map_err(|e| BenchError::Generator(format!("pseudo-inverse failed: {e}")))?;
    let lip = regrad::problem::estimate_lipschitz_quadratic(a)?;
    let starts = [
        Vector::zeros(dim),
        Vector::from_fn(dim, |i, _| if i % 2 == 0 { 10.0 } else { -10.0 }),
    ];
    let mut answers = Vec::with_capacity(2);
    for start in &starts {
        let x_hat = lsq_minimizer(a, b, set, lip, set.project(start)?)?;
        let p = a * &x_hat;
        answers.push(dykstra(set, &pinv, a, &p, &Vector::zeros(dim))?);
    }
    let gap = (&answers[0] - &answers[1]).norm();
    if gap > AGREEMENT_TOL {
        return Err(BenchError::Generator(format!(
            "minimal-norm oracle runs disagree by {gap:e}; ground truth not trusted"
        )));
    }
    Ok(answers.swap_remove(0))
}

fn lsq_minimizer(a: &DMatrix<f64>, b: &Vector, set: &dyn FeasibleSet, lip: f64, mut x: Vector) -> BenchResult<Vector> {
    if lip == 0.0 {
        return Ok(x);
    }
    let step = 1.0 / lip;
    for _ in 0..ORACLE_MAX_ITER {
        let g = a.tr_mul(&(a * &x - b));
        let next = set.project(&(&x - g * step))?;
        let moved = (&next - &x).norm();
        x = next;
        if moved <= ORACLE_TOL {
            return Ok(x);
        }
    }
    Err(BenchError::Generator("least-squares oracle did not converge".into()))
}

/// Projection of `z` onto `set ∩ {x : Ax = p}`.
fn dykstra(set: &dyn FeasibleSet, pinv: &DMatrix<f64>, a: &DMatrix<f64>, p: &Vector, z: &Vector) -> BenchResult<Vector> {
    let dim = z.len();
    let affine = |v: &Vector| v - pinv * (a * v - p);
    let mut x = z.clone();
    let (mut corr_set, mut corr_aff) = (Vector::zeros(dim), Vector::zeros(dim));
    for _ in 0..ORACLE_MAX_ITER {
        let y = set.project(&(&x + &corr_set))?;
        corr_set = &x + &corr_set - &y;
        let next = affine(&(&y + &corr_aff));
        corr_aff = &y + &corr_aff - &next;
        let moved = (&next - &x).norm();
        x = next;
        if moved <= ORACLE_TOL && (&x - &y).norm() <= ORACLE_TOL {
            return Ok(x);
        }
    }
    Err(BenchError::Generator("minimal-norm projection did not converge".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn illposed_box_facts() {
        let gp = make_illposed_box(2).unwrap();
        assert_eq!(gp.analytic_xstar_n, dvector![0.5, 0.5]);
        assert_eq!(gp.analytic_l, 2.0);
        assert_eq!(gp.analytic_fstar, 0.0);
        let other = dvector![1.0, 0.0];
        assert_eq!(gp.problem.objective.value(&other), 0.0);
        assert!(other.norm() > gp.analytic_xstar_n.norm());

        let gp = make_illposed_box(3).unwrap();
        assert_eq!(gp.analytic_l, 3.0);
        assert!((gp.analytic_xstar_n.sum() - 1.0).abs() < 1e-15);
        assert!(make_illposed_box(1).is_err());
    }

    #[test]
    fn illposed_simplex_facts() {
        let gp = make_illposed_simplex(3).unwrap();
        let third = 1.0 / 3.0;
        assert_eq!(gp.analytic_xstar_n, dvector![third, third, third]);
        assert_eq!(gp.problem.objective.value(&dvector![0.0, 0.0, 1.0]), 0.0);
        assert_eq!(gp.analytic_fstar, 0.0);
        assert!(make_illposed_simplex(2).is_err());
    }

    /// Minimum of |x|^2 over {x_1 = x_2} on the simplex by a lattice scan.
    #[test]
    fn simplex_minimal_norm_by_grid() {
        let n = 600;
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..=n / 2 {
            let t = i as f64 / n as f64;
            let x = dvector![t, t, 1.0 - 2.0 * t];
            if x.norm_squared() < best.0 {
                best = (x.norm_squared(), t);
            }
        }
        assert!((best.1 - 1.0 / 3.0).abs() <= 1.0 / n as f64);
    }

    #[test]
    fn rankdef_reduces_to_illposed_box() {
        let gp = make_rankdef_lsq(
            dmatrix![1.0, 1.0; 0.0, 0.0],
            dvector![1.0, 0.0],
            Arc::new(BoxSet::cube(2, -1.0, 1.0).unwrap()),
        )
        .unwrap();
        assert!((&gp.analytic_xstar_n - dvector![0.5, 0.5]).norm() < 1e-8);
        assert!((gp.analytic_l - 2.0).abs() < 1e-9);
    }

    #[test]
    fn rankdef_wellposed_case() {
        let gp = make_rankdef_lsq(
            DMatrix::identity(2, 2),
            dvector![0.3, 0.4],
            Arc::new(BoxSet::cube(2, -1.0, 1.0).unwrap()),
        )
        .unwrap();
        assert!((&gp.analytic_xstar_n - dvector![0.3, 0.4]).norm() < 1e-9);
    }

    #[test]
    fn rankdef_reduces_to_illposed_simplex() {
        let gp = make_rankdef_lsq(
            dmatrix![1.0, -1.0, 0.0; 0.0, 0.0, 0.0],
            dvector![0.0, 0.0],
            Arc::new(SimplexSet::new(3).unwrap()),
        )
        .unwrap();
        let third = 1.0 / 3.0;
        assert!((&gp.analytic_xstar_n - dvector![third, third, third]).norm() < 1e-8);
    }

    fn rankdef_matrix(dim: usize, seed: u64) -> DMatrix<f64> {
        random_low_rank(&mut ChaCha8Rng::seed_from_u64(seed), dim)
    }

    #[test]
    fn rankdef_truth_is_feasible_and_optimal() {
        let gp = make_rankdef_box(6, 7).unwrap();
        assert!(gp.problem.set.contains(&gp.analytic_xstar_n, 1e-9));
        assert!(gp.analytic_fstar < 1e-16);
        // Moving along the null space while staying feasible never shortens x*_n.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = rankdef_matrix(6, 7);
        let svd = a.clone().svd(false, true);
        let v_t = svd.v_t.unwrap();
        let null: Vec<Vector> = (0..6)
            .filter(|&i| i >= svd.singular_values.len() || svd.singular_values[i] < 1e-10)
            .map(|i| v_t.row(i).transpose())
            .collect();
        assert_eq!(null.len(), 3);
        let x = &gp.analytic_xstar_n;
        for _ in 0..2000 {
            let mut dir = Vector::zeros(6);
            for v in &null {
                dir += v * rng.random_range(-1.0..1.0);
            }
            let y = x + dir * 1e-3;
            if gp.problem.set.contains(&y, 0.0) {
                assert!(y.norm() >= x.norm() - 1e-12);
                assert!(gp.problem.objective.value(&y) < 1e-14);
            }
        }
        let again = make_rankdef_box(6, 7).unwrap();
        assert_eq!(gp.analytic_xstar_n, again.analytic_xstar_n);
    }

    #[test]
    fn wellposed_facts() {
        let gp = make_wellposed_box(3).unwrap();
        assert_eq!(gp.analytic_xstar_n, dvector![1.0, 0.5, 0.5]);
        assert!((gp.analytic_fstar - 0.5).abs() < 1e-15);
        let gp = make_wellposed_simplex(3).unwrap();
        assert_eq!(gp.analytic_xstar_n, dvector![0.6, 0.4, 0.0]);
        assert!((gp.analytic_fstar - 0.125).abs() < 1e-15);
        let proj = gp.problem.set.project(&dvector![0.6, 0.4, -0.5]).unwrap();
        assert!((proj - dvector![0.6, 0.4, 0.0]).norm() < 1e-15);
    }

    #[test]
    fn labels_parse() {
        assert_eq!(problem_by_label("illposed_box:2", 0).unwrap().label, "illposed_box:2");
        assert_eq!(problem_by_label("rankdef_box:4", 1).unwrap().label, "rankdef_box:4");
        assert!(problem_by_label("illposed_box", 0).is_err());
        assert!(problem_by_label("nope:3", 0).is_err());
    }
}
