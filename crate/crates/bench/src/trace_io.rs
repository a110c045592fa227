//! CSV traces with a JSON sidecar.
//!
//! The CSV holds one row per outer record; the sidecar next to it (same stem,
//! `.json` extension) holds the configuration, constants, counters and the
//! vectors needed to rebuild the full [`SolverTrace`].

use std::fs;
use std::path::{Path, PathBuf};

use regrad::{Method, OracleCounters, OuterRecord, SolverTrace, StopReason, Vector};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{BenchError, BenchResult};

pub const CSV_HEADER: [&str; 7] = ["l", "epsilon_l", "delta_l", "N_l", "delta_wl", "dist_xstar", "cum_inner"];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SidecarConstants {
    pub beta: Option<f64>,
    pub theta: Option<f64>,
    pub nu: Option<f64>,
    pub sigma: Option<f64>,
    pub gamma: Option<f64>,
    pub lprime: Option<f64>,
    pub c1: Option<f64>,
    pub c2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarRecord {
    pub w: Vec<f64>,
    pub phi_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSidecar {
    pub method: String,
    pub config: Option<ExperimentConfig>,
    pub constants: SidecarConstants,
    pub counters: OracleCounters,
    /// Absent when no step was taken.
    pub min_observed_lambda: Option<f64>,
    pub stop_reason: String,
    pub final_point: Vec<f64>,
    pub xstar_norm: Option<f64>,
    pub gaps: Vec<f64>,
    pub records: Vec<SidecarRecord>,
}

impl TraceSidecar {
    pub fn new(
        trace: &SolverTrace,
        config: Option<ExperimentConfig>,
        constants: SidecarConstants,
        xstar_norm: Option<f64>,
    ) -> Self {
        Self {
            method: trace.method.as_str().to_owned(),
            config,
            constants,
            counters: trace.counters,
            min_observed_lambda: trace.min_observed_lambda.is_finite().then_some(trace.min_observed_lambda),
            stop_reason: trace.stop_reason.as_str().to_owned(),
            final_point: trace.final_point.iter().copied().collect(),
            xstar_norm,
            gaps: trace.gaps.clone(),
            records: trace
                .outer
                .iter()
                .map(|r| SidecarRecord {
                    w: r.w.iter().copied().collect(),
                    phi_gap: r.phi_gap,
                })
                .collect(),
        }
    }
}

/// `trace.csv` -> `trace.json`.
pub fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn parse_opt(field: &str, row: usize, s: &str) -> BenchResult<Option<f64>> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| BenchError::Trace(format!("row {row}: `{field}` value `{s}` is not a number")))
}

fn parse_req<T: std::str::FromStr>(field: &str, row: usize, s: &str) -> BenchResult<T> {
    s.parse()
        .map_err(|_| BenchError::Trace(format!("row {row}: `{field}` value `{s}` is malformed")))
}

/// Writes the CSV and its sidecar, creating parent directories as needed.
pub fn write_trace(csv_path: &Path, trace: &SolverTrace, sidecar: &TraceSidecar) -> BenchResult<()> {
    if let Some(dir) = csv_path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let mut w = csv::Writer::from_path(csv_path)?;
    w.write_record(CSV_HEADER)?;
    for (r, cum) in trace.outer.iter().zip(trace.cumulative_inner()) {
        w.write_record([
            r.l.to_string(),
            fmt_opt(r.epsilon),
            fmt_opt(r.delta),
            r.inner.to_string(),
            fmt_opt(r.delta_w),
            fmt_opt(r.dist_xstar),
            cum.to_string(),
        ])?;
    }
    w.flush()?;
    fs::write(sidecar_path(csv_path), serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

/// Reads a trace written by [`write_trace`].
pub fn read_trace(csv_path: &Path) -> BenchResult<(SolverTrace, TraceSidecar)> {
    let sidecar: TraceSidecar = serde_json::from_str(&fs::read_to_string(sidecar_path(csv_path))?)?;
    let mut reader = csv::Reader::from_path(csv_path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(BenchError::Trace(format!(
            "unexpected header `{}`",
            header.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut outer = Vec::new();
    let mut cum = 0u64;
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let rec = sidecar
            .records
            .get(i)
            .ok_or_else(|| BenchError::Trace(format!("sidecar has no record for row {i}")))?;
        let inner: u64 = parse_req("N_l", i, &row[3])?;
        cum += inner;
        if parse_req::<u64>("cum_inner", i, &row[6])? != cum {
            return Err(BenchError::Trace(format!("row {i}: cum_inner disagrees with N_l")));
        }
        outer.push(OuterRecord {
            l: parse_req("l", i, &row[0])?,
            epsilon: parse_opt("epsilon_l", i, &row[1])?,
            delta: parse_opt("delta_l", i, &row[2])?,
            inner,
            w: Vector::from_vec(rec.w.clone()),
            phi_gap: rec.phi_gap,
            delta_w: parse_opt("delta_wl", i, &row[4])?,
            dist_xstar: parse_opt("dist_xstar", i, &row[5])?,
        });
    }
    if outer.len() != sidecar.records.len() {
        return Err(BenchError::Trace(format!(
            "CSV has {} rows but the sidecar has {} records",
            outer.len(),
            sidecar.records.len()
        )));
    }
    let method: Method = sidecar.method.parse().map_err(BenchError::Trace)?;
    let stop_reason: StopReason = sidecar.stop_reason.parse().map_err(BenchError::Trace)?;
    let trace = SolverTrace {
        method,
        outer,
        gaps: sidecar.gaps.clone(),
        counters: sidecar.counters,
        min_observed_lambda: sidecar.min_observed_lambda.unwrap_or(f64::INFINITY),
        final_point: Vector::from_vec(sidecar.final_point.clone()),
        stop_reason,
    };
    Ok((trace, sidecar))
}
