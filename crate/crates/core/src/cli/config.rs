//! Versioned JSON experiment configuration.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ergo::{ScalarFunction, TauSource};
use crate::error::{Error, Result};
use crate::models::{Limits, ModelDescriptor};

/// Version of the config format and of the CSV column layout.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    pub model: ModelDescriptor,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub limits: Option<Limits>,
    #[serde(default)]
    pub estimators: Vec<Task>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    /// Drift threshold for the measurable flag.
    #[serde(default = "default_measurable_tol")]
    pub measurable_tol: f64,
    /// Seed for randomized diagnostics.
    #[serde(default)]
    pub seed: u64,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("nctrunc-out")
}

fn default_measurable_tol() -> f64 {
    crate::seq::DEFAULT_MEASURABLE_TOL
}

/// One estimator or diagnostic run; `id` names its CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    #[serde(flatten)]
    pub kind: TaskKind,
    #[serde(default, rename = "assert", skip_serializing_if = "Option::is_none")]
    pub assertion: Option<Assertion>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum TaskKind {
    Weyl {
        lambda_ladder: Vec<f64>,
    },
    TruncatedIntegral {
        op: String,
        #[serde(default)]
        lambda_ladder: Option<Vec<f64>>,
    },
    LogMeanDiagonal {
        op: String,
        #[serde(default)]
        horizons: Option<Vec<usize>>,
    },
    DixmierDiagonal {
        op: String,
        #[serde(default)]
        horizons: Option<Vec<usize>>,
        #[serde(default)]
        d: Option<f64>,
    },
    WeightedDixmier {
        op: String,
        s: f64,
        lambda_ladder: Vec<f64>,
    },
    HeatIntegral {
        op: String,
        #[serde(default)]
        t_ladder: Option<Vec<f64>>,
    },
    Frohlich {
        op: String,
        #[serde(default)]
        beta: f64,
        t_ladder: Vec<f64>,
    },
    Szego {
        op: String,
        function: FunctionSpec,
        lambda_ladder: Vec<f64>,
        #[serde(default = "default_tau")]
        rhs: TauSource,
    },
    Widom {
        op: String,
        op_b: String,
        lambda_ladder: Vec<f64>,
    },
    Qe {
        op: String,
        lambda_ladder: Vec<f64>,
        #[serde(default = "default_tau")]
        tau: TauSource,
    },
    TimeAverage {
        op: String,
        t_ladder: Vec<f64>,
        lambda: f64,
        horizon: usize,
    },
}

fn default_tau() -> TauSource {
    TauSource::LogMean
}

impl TaskKind {
    pub fn estimator(&self) -> &'static str {
        match self {
            Self::Weyl { .. } => "weyl",
            Self::TruncatedIntegral { .. } => "truncated_integral",
            Self::LogMeanDiagonal { .. } => "log_mean_diagonal",
            Self::DixmierDiagonal { .. } => "dixmier_diagonal",
            Self::WeightedDixmier { .. } => "weighted_dixmier",
            Self::HeatIntegral { .. } => "heat_integral",
            Self::Frohlich { .. } => "frohlich",
            Self::Szego { .. } => "szego",
            Self::Widom { .. } => "widom",
            Self::Qe { .. } => "qe",
            Self::TimeAverage { .. } => "time_average",
        }
    }
}

/// Polynomial `f` for Szegő tasks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `x^p`.
    Monomial(u32),
    /// Coefficients `c_0, c_1, …`.
    Polynomial(Vec<f64>),
}

impl From<&FunctionSpec> for ScalarFunction {
    fn from(f: &FunctionSpec) -> Self {
        match f {
            FunctionSpec::Monomial(p) => ScalarFunction::monomial(*p),
            FunctionSpec::Polynomial(c) => ScalarFunction::Polynomial(c.clone()),
        }
    }
}

/// Check on a task's primary value or verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Assertion {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub abs_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
    /// Expected verdict string, compared exactly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
}

impl ExperimentConfig {
    pub fn from_json(src: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(src)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        let mut seen = HashSet::new();
        for t in &self.estimators {
            if t.id.is_empty()
                || !t
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
            {
                return Err(Error::invalid(format!(
                    "task id `{}` must be non-empty and use [A-Za-z0-9_-]",
                    t.id
                )));
            }
            if !seen.insert(t.id.as_str()) {
                return Err(Error::invalid(format!("duplicate task id `{}`", t.id)));
            }
            if let Some(a) = &t.assertion {
                if a.value.is_some() && a.abs_tol.is_none() && a.rel_tol.is_none() {
                    return Err(Error::invalid(format!(
                        "task `{}`: a value assertion needs abs_tol or rel_tol",
                        t.id
                    )));
                }
            }
        }
        if !(self.measurable_tol > 0.0) {
            return Err(Error::invalid("measurable_tol must be positive"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"{
        "schema_version": 1,
        "name": "sample",
        "model": {"name": "nc_torus", "d": 2, "theta": [[0, 0.5], [-0.5, 0]]},
        "estimators": [
            {"id": "ti", "estimator": "truncated_integral", "op": "u(1, 0)", "lambda_ladder": [8, 16],
             "assert": {"value": 0, "abs_tol": 1e-12}},
            {"id": "sz", "estimator": "szego", "op": "u(1,0) + adj(u(1,0))",
             "function": {"monomial": 2}, "lambda_ladder": [10, 20], "rhs": "truncated"},
            {"id": "q", "estimator": "qe", "op": "u(1,0)", "lambda_ladder": [4, 8],
             "tau": {"fixed": [0, 0]}, "assert": {"verdict": "QE-consistent"}}
        ]
    }"#;

    #[test]
    fn round_trip_is_lossless() {
        let cfg = ExperimentConfig::from_json(SAMPLE).unwrap();
        let back = ExperimentConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(cfg, back);
        assert_eq!(cfg.estimators[2].kind.estimator(), "qe");
    }

    #[test]
    fn rejects_bad_configs() {
        let v2 = SAMPLE.replace("\"schema_version\": 1", "\"schema_version\": 2");
        assert_eq!(ExperimentConfig::from_json(&v2).unwrap_err().exit_code(), 2);
        let dup = SAMPLE.replace("\"id\": \"sz\"", "\"id\": \"ti\"");
        assert!(ExperimentConfig::from_json(&dup).is_err());
        let typo = SAMPLE.replace("\"estimators\"", "\"estimator\"");
        assert!(ExperimentConfig::from_json(&typo).is_err());
        let no_tol = SAMPLE.replace(", \"abs_tol\": 1e-12", "");
        assert!(ExperimentConfig::from_json(&no_tol).is_err());
    }
}
