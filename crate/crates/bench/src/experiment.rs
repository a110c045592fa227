//! Single experiments and parameter sweeps.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use regrad::{run_cgm, run_cgrm, run_gpm, run_gprm, run_iterreg, Method, MethodConstants, SolverTrace, Vector};
use serde::Deserialize;

use crate::complexity::{bound_c1, bound_c2};
use crate::config::ExperimentConfig;
use crate::error::{BenchError, BenchResult};
use crate::generators::{problem_by_label, GeneratedProblem};
use crate::trace_io::{write_trace, SidecarConstants, TraceSidecar};

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub config: ExperimentConfig,
    pub generated: GeneratedProblem,
    pub trace: SolverTrace,
    /// Two-level methods only.
    pub constants: Option<MethodConstants>,
    pub sidecar: TraceSidecar,
}

fn default_step(lipschitz: f64) -> f64 {
    if lipschitz > 0.0 {
        1.0 / lipschitz
    } else {
        1.0
    }
}

/// Builds the problem, runs the configured solver and writes the trace when
/// `cfg.output` is set.
pub fn run_experiment(cfg: &ExperimentConfig) -> BenchResult<ExperimentOutcome> {
    cfg.validate()?;
    let method = cfg.method()?;
    let generated = problem_by_label(&cfg.problem_label, cfg.seed)?;
    let prob = &generated.problem;
    cfg.validate_for_lipschitz(prob.lipschitz())?;
    let x0 = match &cfg.x0 {
        Some(v) if v.len() != prob.dim() => {
            return Err(BenchError::config(
                "x0",
                format!("has {} entries but the problem has dimension {}", v.len(), prob.dim()),
            ))
        }
        Some(v) => Vector::from_vec(v.clone()),
        None => generated.default_start.clone(),
    };
    if !prob.set.contains(&x0, regrad::MEMBERSHIP_TOL) {
        return Err(BenchError::config("x0", "is not feasible"));
    }
    let beta = cfg.constants.beta;
    let theta = cfg.constants.theta;
    let (trace, constants) = match method {
        Method::Gpm => {
            let lambda = cfg.schedule.lambda.unwrap_or_else(|| default_step(prob.lipschitz()));
            (run_gpm(prob, lambda, &x0, cfg.max_iter)?, None)
        }
        Method::Cgm => {
            let theta_k = cfg.schedule.theta_k.unwrap_or_else(|| default_step(prob.lipschitz()));
            (run_cgm(prob, theta_k, &x0, cfg.max_iter)?, None)
        }
        Method::IterReg => (run_iterreg(prob, &cfg.iterreg_schedule()?, &x0, cfg.max_iter)?, None),
        Method::Gprm => {
            let sched = cfg.geometric_schedule()?;
            let consts = MethodConstants::gprm(beta, theta, prob.lipschitz(), sched.epsilon0)?;
            (run_gprm(prob, &sched, &consts, &x0, &cfg.stop_policy())?, Some(consts))
        }
        Method::Cgrm => {
            let sched = cfg.geometric_schedule()?;
            let consts = MethodConstants::cgrm_for(prob, beta, theta, sched.epsilon0, &x0)?;
            (run_cgrm(prob, &sched, &consts, &x0, &cfg.stop_policy())?, Some(consts))
        }
    };
    let xstar_norm = generated.analytic_xstar_n.norm();
    let mut sc = SidecarConstants::default();
    if let Some(c) = &constants {
        let sched = cfg.geometric_schedule()?;
        let c1 = bound_c1(method, &sched, c, xstar_norm)?;
        sc = SidecarConstants {
            beta: Some(c.beta),
            theta: Some(c.theta),
            nu: Some(sched.nu),
            sigma: Some(sched.sigma),
            gamma: Some(c.gamma),
            lprime: Some(c.lprime),
            c1: Some(c1),
            c2: Some(bound_c2(c1, &sched, c)),
        };
    }
    let sidecar = TraceSidecar::new(&trace, Some(cfg.clone()), sc, Some(xstar_norm));
    if let Some(path) = &cfg.output {
        write_trace(path, &trace, &sidecar)?;
    }
    Ok(ExperimentOutcome {
        config: cfg.clone(),
        generated,
        trace,
        constants,
        sidecar,
    })
}

/// Grid key and value pairs of one sweep run.
pub type Assignment = Vec<(String, toml::Value)>;

/// A base configuration and, per dotted key, the values to sweep over.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: toml::Table,
    pub grid: BTreeMap<String, Vec<toml::Value>>,
    /// Traces go to `output_dir/run_NNN.csv`; nothing is written when absent.
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct SweepRun {
    pub index: usize,
    pub assignment: Assignment,
    pub result: Result<ExperimentOutcome, String>,
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> BenchResult<Self> {
        Ok(toml::from_str(&std::fs::read_to_string(path)?)?)
    }

    /// Every combination of grid values, applied to the base table and
    /// validated.
    pub fn expand(&self) -> BenchResult<Vec<(Assignment, ExperimentConfig)>> {
        if let Some((key, _)) = self.grid.iter().find(|(_, v)| v.is_empty()) {
            return Err(BenchError::config(format!("grid.{key}"), "needs at least one value"));
        }
        let keys: Vec<&String> = self.grid.keys().collect();
        let total: usize = self.grid.values().map(Vec::len).product();
        let mut out = Vec::with_capacity(total);
        for index in 0..total {
            let mut rem = index;
            let mut table = self.base.clone();
            let mut assignment = Vec::with_capacity(keys.len());
            for key in keys.iter().rev() {
                let values = &self.grid[*key];
                let v = values[rem % values.len()].clone();
                rem /= values.len();
                set_dotted(&mut table, key, v.clone())?;
                assignment.push(((*key).clone(), v));
            }
            assignment.reverse();
            if let Some(dir) = &self.output_dir {
                table.insert(
                    "output".into(),
                    toml::Value::String(dir.join(format!("run_{index:03}.csv")).to_string_lossy().into_owned()),
                );
            }
            let cfg: ExperimentConfig = table.try_into()?;
            cfg.validate()?;
            out.push((assignment, cfg));
        }
        Ok(out)
    }
}

fn set_dotted(table: &mut toml::Table, key: &str, value: toml::Value) -> BenchResult<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let last = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| BenchError::config("grid", "empty key"))?;
    let mut cur = table;
    for part in parts {
        cur = cur
            .entry(part)
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| BenchError::config(format!("grid.{key}"), format!("`{part}` is not a section")))?;
    }
    cur.insert(last.to_owned(), value);
    Ok(())
}

/// Runs every combination, `threads` at a time. Individual failures are
/// recorded per run rather than aborting the sweep.
pub fn run_sweep(sweep: &SweepConfig, threads: usize) -> BenchResult<Vec<SweepRun>> {
    let jobs = sweep.expand()?;
    let next = AtomicUsize::new(0);
    let results = Mutex::new(Vec::with_capacity(jobs.len()));
    std::thread::scope(|s| {
        for _ in 0..threads.max(1).min(jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some((assignment, cfg)) = jobs.get(i) else { break };
                let result = run_experiment(cfg).map_err(|e| e.to_string());
                results.lock().expect("sweep results poisoned").push(SweepRun {
                    index: i,
                    assignment: assignment.clone(),
                    result,
                });
            });
        }
    });
    let mut runs = results.into_inner().expect("sweep results poisoned");
    runs.sort_by_key(|r| r.index);
    if let Some(dir) = &sweep.output_dir {
        write_sweep_summary(&dir.join("sweep_summary.csv"), &runs)?;
    }
    Ok(runs)
}

fn write_sweep_summary(path: &Path, runs: &[SweepRun]) -> BenchResult<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["run", "assignment", "status", "total_inner", "final_dist_xstar", "stop_reason"])?;
    for run in runs {
        let assignment = run
            .assignment
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        let row = match &run.result {
            Ok(o) => [
                run.index.to_string(),
                assignment,
                "ok".into(),
                o.trace.counters.inner_iterations.to_string(),
                o.trace.outer.last().and_then(|r| r.dist_xstar).map(|d| format!("{d:?}")).unwrap_or_default(),
                o.trace.stop_reason.as_str().into(),
            ],
            Err(e) => [run.index.to_string(), assignment, format!("error: {e}"), String::new(), String::new(), String::new()],
        };
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
