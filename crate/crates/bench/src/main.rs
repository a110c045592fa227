use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use regrad_bench::acceptance;
use regrad_bench::complexity::{measure_complexity, DEFAULT_ALPHA_GRID};
use regrad_bench::trace_io::read_trace;
use regrad_bench::{run_experiment, run_sweep, BenchError, ExperimentConfig, SweepConfig};
use regrad::{GeometricSchedule, MethodConstants};

#[derive(Parser)]
#[command(name = "regrad", version, about = "Regularized gradient projection and conditional gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run { config: PathBuf },
    /// Run the cartesian product of a `[grid]` over a `[base]` config.
    Sweep {
        config: PathBuf,
        /// Worker threads.
        #[arg(long, default_value_t = 4)]
        threads: usize,
    },
    /// Run the acceptance suite; exits with 3 if any check fails.
    Verify {
        /// Run only these criteria (1 to 11).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Complexity tables from stored traces.
    Report {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Decreasing accuracy levels.
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHA_GRID)]
        alphas: Vec<f64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => cmd_run(&config),
        Command::Sweep { config, threads } => cmd_sweep(&config, threads),
        Command::Verify { only } => return cmd_verify(&only),
        Command::Report { traces, alphas } => cmd_report(&traces, &alphas),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<BenchError>().map_or(1, BenchError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}

fn cmd_run(path: &Path) -> anyhow::Result<()> {
    let cfg = ExperimentConfig::from_path(path).map_err(anyhow::Error::new)?;
    let out = run_experiment(&cfg)?;
    let t = &out.trace;
    println!("method       {}", t.method);
    println!("problem      {}", out.generated.label);
    println!("stop         {}", t.stop_reason.as_str());
    println!("records      {}", t.outer.len());
    println!("inner iters  {}", t.counters.inner_iterations);
    println!(
        "oracles      {} gradients, {} projections, {} lmo calls, {} line-search trials",
        t.counters.gradient_evals, t.counters.projections, t.counters.lmo_calls, t.counters.linesearch_trials
    );
    if let Some(r) = t.outer.last() {
        if let Some(d) = r.dist_xstar {
            println!("|w - x*_n|   {d:.6e}");
        }
        if let Some(d) = r.delta_w {
            println!("f(w) - f*    {d:.6e}");
        }
    }
    if let Some(c) = &out.constants {
        println!("gamma        {:.6e} (min observed step {:.6e})", c.gamma, t.min_observed_lambda);
    }
    if let Some(p) = &cfg.output {
        println!("trace        {}", p.display());
    }
    Ok(())
}

fn cmd_sweep(path: &Path, threads: usize) -> anyhow::Result<()> {
    let sweep = SweepConfig::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let runs = run_sweep(&sweep, threads)?;
    let mut failed = None;
    for run in &runs {
        let assignment: Vec<String> = run.assignment.iter().map(|(k, v)| format!("{k}={v}")).collect();
        match &run.result {
            Ok(o) => println!(
                "run {:>3}  {:<40} inner {:>9}  dist {}",
                run.index,
                assignment.join(" "),
                o.trace.counters.inner_iterations,
                o.trace.outer.last().and_then(|r| r.dist_xstar).map_or("-".into(), |d| format!("{d:.3e}"))
            ),
            Err(e) => {
                println!("run {:>3}  {:<40} failed: {e}", run.index, assignment.join(" "));
                failed.get_or_insert(e.clone());
            }
        }
    }
    match failed {
        Some(e) => anyhow::bail!("at least one sweep run failed, first: {e}"),
        None => Ok(()),
    }
}

fn cmd_verify(only: &[u8]) -> ExitCode {
    let ids: Vec<u8> = if only.is_empty() { (1..=11).collect() } else { only.to_vec() };
    let mut all_pass = true;
    for id in ids {
        let outcome = acceptance::run_criterion(id);
        all_pass &= outcome.passed;
        println!("{outcome}");
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

fn cmd_report(paths: &[PathBuf], alphas: &[f64]) -> anyhow::Result<()> {
    for path in paths {
        let (trace, sidecar) = read_trace(path).with_context(|| format!("reading {}", path.display()))?;
        let mut report = measure_complexity(&trace, alphas)?;
        let c = &sidecar.constants;
        let has_bound = match (c.beta, c.theta, c.gamma, c.lprime, c.nu, c.sigma, sidecar.xstar_norm) {
            (Some(beta), Some(theta), Some(gamma), Some(lprime), Some(nu), Some(sigma), Some(xn))
                if trace.method.is_two_level() =>
            {
                let eps0 = sidecar.config.as_ref().map_or(1.0, |cfg| cfg.schedule.epsilon0);
                let sched = GeometricSchedule::new(eps0, nu, sigma)?;
                let consts = MethodConstants {
                    beta,
                    theta,
                    gamma,
                    lprime,
                    ldoubleprime: None,
                    diameter: None,
                };
                report.attach_bound(trace.method, &sched, &consts, xn)?;
                true
            }
            _ => false,
        };
        println!("{} ({})", path.display(), trace.method);
        println!("  {:>10}  {:>12}  {:>14}", "alpha", "N(alpha)", "bound");
        for (i, &a) in report.alpha_grid.iter().enumerate() {
            let n = report.measured_n[i].map_or("unattained".into(), |n| n.to_string());
            let b = report.bound_n.get(i).map_or("-".into(), |b| format!("{b:.4e}"));
            println!("  {a:>10e}  {n:>12}  {b:>14}");
        }
        if let (Some(c1), Some(c2)) = (report.c1, report.c2) {
            println!("  C1 = {c1:.6e}, C2 = {c2:.6e} (computed from the bound formulas)");
        }
        match report.fitted_exponent {
            Some(e) => println!("  fitted exponent {e:.4} over {} points", report.fit_points),
            None => println!("  fitted exponent: fewer than 2 usable points"),
        }
        if has_bound {
            let violations = report.bound_violations();
            if !violations.is_empty() {
                anyhow::bail!("{}: measured counts exceed the bound at {:?}", path.display(), violations);
            }
        }
    }
    Ok(())
}
