//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use regrad::{GeometricSchedule, IterRegSchedule, Method, StopPolicy};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, BenchResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleConfig {
    #[serde(default = "one")]
    pub epsilon0: f64,
    #[serde(default = "half")]
    pub nu: f64,
    #[serde(default = "half")]
    pub sigma: f64,
    /// Iterative regularization exponent.
    #[serde(default = "quarter")]
    pub tau: f64,
    /// GPM step; defaults to `1 / L`.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// CGM step factor; defaults to `1 / L`.
    #[serde(default)]
    pub theta_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsConfig {
    #[serde(default = "half")]
    pub beta: f64,
    #[serde(default = "half")]
    pub theta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    #[serde(default = "default_epsilon_min")]
    pub epsilon_min: f64,
    #[serde(default = "default_max_outer")]
    pub max_outer: usize,
    #[serde(default = "default_max_inner")]
    pub max_inner_per_l: u64,
    #[serde(default = "default_max_m")]
    pub max_linesearch_m: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem_label: String,
    pub method: String,
    #[serde(default)]
    pub seed: u64,
    /// CSV trace path; the JSON sidecar goes next to it.
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Starting point; defaults to the generator's.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    /// Iteration budget of the single-level methods.
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub constants: ConstantsConfig,
    #[serde(default)]
    pub stop: StopConfig,
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn quarter() -> f64 {
    0.25
}
fn default_epsilon_min() -> f64 {
    StopPolicy::default().epsilon_min
}
fn default_max_outer() -> usize {
    StopPolicy::default().max_outer
}
fn default_max_inner() -> u64 {
    StopPolicy::default().max_inner_per_l
}
fn default_max_m() -> u32 {
    StopPolicy::default().max_linesearch_m
}
fn default_max_iter() -> usize {
    10_000
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        Self {
            epsilon0: 1.0,
            nu: 0.5,
            sigma: 0.5,
            tau: 0.25,
            lambda: None,
            theta_k: None,
        }
    }
}

impl Default for ConstantsConfig {
    fn default() -> Self {
        Self { beta: 0.5, theta: 0.5 }
    }
}

impl Default for StopConfig {
    fn default() -> Self {
        let p = StopPolicy::default();
        Self {
            epsilon_min: p.epsilon_min,
            max_outer: p.max_outer,
            max_inner_per_l: p.max_inner_per_l,
            max_linesearch_m: p.max_linesearch_m,
        }
    }
}

fn open_unit(field: &str, v: f64) -> BenchResult<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(BenchError::config(field, format!("must lie in (0, 1), got {v}")))
    }
}

fn positive(field: &str, v: f64) -> BenchResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(BenchError::config(field, format!("must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    /// Minimal config with every optional field at its default.
    pub fn new(problem_label: impl Into<String>, method: Method) -> Self {
        Self {
            problem_label: problem_label.into(),
            method: method.as_str().to_owned(),
            seed: 0,
            output: None,
            x0: None,
            max_iter: default_max_iter(),
            schedule: ScheduleConfig::default(),
            constants: ConstantsConfig::default(),
            stop: StopConfig::default(),
        }
    }

    pub fn from_toml_str(s: &str) -> BenchResult<Self> {
        let cfg: Self = toml::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> BenchResult<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn method(&self) -> BenchResult<Method> {
        self.method.parse().map_err(|e: String| BenchError::config("method", e))
    }

    /// Checks every parameter that does not depend on the problem instance.
    pub fn validate(&self) -> BenchResult<()> {
        let method = self.method()?;
        if self.problem_label.trim().is_empty() {
            return Err(BenchError::config("problem_label", "must not be empty"));
        }
        let s = &self.schedule;
        if method.is_two_level() {
            positive("schedule.epsilon0", s.epsilon0)?;
            open_unit("schedule.nu", s.nu)?;
            if !(s.sigma > 0.0 && s.sigma <= 1.0) {
                return Err(BenchError::config("schedule.sigma", format!("must lie in (0, 1], got {}", s.sigma)));
            }
            open_unit("constants.beta", self.constants.beta)?;
            open_unit("constants.theta", self.constants.theta)?;
            positive("stop.epsilon_min", self.stop.epsilon_min)?;
            for (field, v) in [
                ("stop.max_outer", self.stop.max_outer as u64),
                ("stop.max_inner_per_l", self.stop.max_inner_per_l),
                ("stop.max_linesearch_m", u64::from(self.stop.max_linesearch_m)),
            ] {
                if v == 0 {
                    return Err(BenchError::config(field, "must be positive"));
                }
            }
        } else if self.max_iter == 0 {
            return Err(BenchError::config("max_iter", "must be positive"));
        }
        if method == Method::IterReg && !(s.tau > 0.0 && s.tau < 0.5) {
            return Err(BenchError::config("schedule.tau", format!("must lie in (0, 0.5), got {}", s.tau)));
        }
        if let Some(l) = s.lambda {
            positive("schedule.lambda", l)?;
        }
        if let Some(t) = s.theta_k {
            positive("schedule.theta_k", t)?;
        }
        if let Some(x0) = &self.x0 {
            if x0.is_empty() || x0.iter().any(|v| !v.is_finite()) {
                return Err(BenchError::config("x0", "must be a non-empty list of finite numbers"));
            }
        }
        Ok(())
    }

    /// Step-size checks against the Lipschitz constant of the instance.
    pub fn validate_for_lipschitz(&self, lipschitz: f64) -> BenchResult<()> {
        let two_over_l = if lipschitz > 0.0 { 2.0 / lipschitz } else { f64::INFINITY };
        match self.method()? {
            Method::Gpm => {
                if let Some(l) = self.schedule.lambda.filter(|&l| l >= two_over_l) {
                    return Err(BenchError::config("schedule.lambda", format!("must be below 2/L = {two_over_l}, got {l}")));
                }
            }
            Method::Cgm => {
                if let Some(t) = self.schedule.theta_k.filter(|&t| t >= two_over_l) {
                    return Err(BenchError::config("schedule.theta_k", format!("must be below 2/L = {two_over_l}, got {t}")));
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn geometric_schedule(&self) -> BenchResult<GeometricSchedule> {
        Ok(GeometricSchedule::new(self.schedule.epsilon0, self.schedule.nu, self.schedule.sigma)?)
    }

    pub fn iterreg_schedule(&self) -> BenchResult<IterRegSchedule> {
        Ok(IterRegSchedule::new(self.schedule.tau)?)
    }

    pub fn stop_policy(&self) -> StopPolicy {
        StopPolicy {
            epsilon_min: self.stop.epsilon_min,
            max_outer: self.stop.max_outer,
            max_inner_per_l: self.stop.max_inner_per_l,
            max_linesearch_m: self.stop.max_linesearch_m,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_file_gets_defaults() {
        let cfg = ExperimentConfig::from_toml_str("problem_label = \"illposed_box:2\"\nmethod = \"gprm\"\n").unwrap();
        assert_eq!(cfg, ExperimentConfig::new("illposed_box:2", Method::Gprm));
        assert_eq!(cfg.stop.epsilon_min, 1e-6);
    }

    #[test]
    fn nested_sections_parse() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
problem_label = "illposed_simplex:3"
method = "cgrm"
x0 = [1.0, 0.0, 0.0]

[schedule]
sigma = 1.0

[constants]
beta = 0.3

[stop]
epsilon_min = 1e-4
"#,
        )
        .unwrap();
        assert_eq!(cfg.schedule.sigma, 1.0);
        assert_eq!(cfg.constants.beta, 0.3);
        assert_eq!(cfg.stop.epsilon_min, 1e-4);
        assert_eq!(cfg.x0, Some(vec![1.0, 0.0, 0.0]));
    }

    fn field_of(err: BenchError) -> String {
        match err {
            BenchError::Config { field, .. } => field,
            other => panic!("expected a config error, got {other}"),
        }
    }

    #[test]
    fn out_of_range_values_name_their_field() {
        let mut cfg = ExperimentConfig::new("illposed_box:2", Method::Gprm);
        cfg.schedule.nu = 1.2;
        assert_eq!(field_of(cfg.validate().unwrap_err()), "schedule.nu");

        let mut cfg = ExperimentConfig::new("illposed_box:2", Method::Gprm);
        cfg.schedule.sigma = 0.0;
        assert_eq!(field_of(cfg.validate().unwrap_err()), "schedule.sigma");

        let mut cfg = ExperimentConfig::new("illposed_box:2", Method::IterReg);
        cfg.schedule.tau = 0.5;
        assert_eq!(field_of(cfg.validate().unwrap_err()), "schedule.tau");

        let mut cfg = ExperimentConfig::new("illposed_box:2", Method::Gpm);
        cfg.schedule.lambda = Some(1.0);
        assert_eq!(field_of(cfg.validate_for_lipschitz(2.0).unwrap_err()), "schedule.lambda");

        let cfg = ExperimentConfig {
            method: "newton".into(),
            ..ExperimentConfig::new("illposed_box:2", Method::Gpm)
        };
        assert_eq!(field_of(cfg.validate().unwrap_err()), "method");
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = ExperimentConfig::from_toml_str("problem_label = \"a:2\"\nmethod = \"gprm\"\nbogus = 1\n").unwrap_err();
        assert!(matches!(err, BenchError::Toml(_)));
    }

    #[test]
    fn toml_round_trip() {
        let mut cfg = ExperimentConfig::new("illposed_box:2", Method::Cgm);
        cfg.schedule.theta_k = Some(0.25);
        cfg.output = Some("out/x.csv".into());
        assert_eq!(ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap(), cfg);
    }
}
