//! Executes an [`ExperimentConfig`]: one CSV per task plus `summary.json`.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::config::{Assertion, ExperimentConfig, Task, TaskKind, SCHEMA_VERSION};
use crate::ergo::{self, ScalarFunction};
use crate::error::{Error, Result};
use crate::expr::compile_str;
use crate::integrals::{self, EstimateReport};
use crate::models::{ModelDescriptor, SpectralModel};

/// CSV columns, fixed for a given [`SCHEMA_VERSION`].
pub const CSV_HEADER: [&str; 8] = [
    "schema_version",
    "estimator",
    "model",
    "operator",
    "ladder_point",
    "count",
    "value_re",
    "value_im",
];

/// One CSV row: a ladder point, `N(λ)` when the ladder is a cutoff, and the statistic.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub ladder_point: f64,
    pub count: Option<usize>,
    pub value: Complex64,
}

/// Output of a single task before it is written out.
#[derive(Debug, Clone)]
pub struct TaskOutput {
    pub estimator: String,
    pub operator: String,
    pub rows: Vec<Row>,
    /// Primary value compared by assertions.
    pub value: Complex64,
    pub verdict: Option<String>,
    /// Full estimator report.
    pub report: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssertionOutcome {
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskResult {
    pub id: String,
    pub estimator: String,
    pub operator: String,
    pub csv: PathBuf,
    pub value: Complex64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub assertion: Option<AssertionOutcome>,
    pub report: serde_json::Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub schema_version: u32,
    pub name: String,
    pub model: ModelDescriptor,
    /// All declared assertions passed.
    pub passed: bool,
    pub results: Vec<TaskResult>,
}

impl Summary {
    /// Process exit code: 0 when every assertion passed, 4 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            4
        }
    }
}

fn cutoff_rows(model: &SpectralModel, ladder: &[f64], values: &[Complex64]) -> Vec<Row> {
    ladder
        .iter()
        .zip(values)
        .map(|(&l, &v)| Row {
            ladder_point: l,
            count: Some(model.counting(l)),
            value: v,
        })
        .collect()
}

fn plain_rows(ladder: &[f64], values: &[Complex64]) -> Vec<Row> {
    ladder
        .iter()
        .zip(values)
        .map(|(&l, &v)| Row {
            ladder_point: l,
            count: None,
            value: v,
        })
        .collect()
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn estimate_output(
    model: &SpectralModel,
    r: EstimateReport,
    cutoffs: bool,
    tol: f64,
) -> Result<TaskOutput> {
    let r = r.with_tolerance(tol);
    let rows = if cutoffs {
        cutoff_rows(model, &r.ladder, &r.values)
    } else {
        plain_rows(&r.ladder, &r.values)
    };
    Ok(TaskOutput {
        estimator: r.estimator.clone(),
        operator: r.operator.clone(),
        value: r.value,
        verdict: r.verdict.clone(),
        rows,
        report: serde_json::to_value(&r)?,
    })
}

/// Runs one task against `model`.
pub fn run_task(model: &SpectralModel, kind: &TaskKind, measurable_tol: f64) -> Result<TaskOutput> {
    let op = |src: &str| compile_str(src, model);
    match kind {
        TaskKind::Weyl { lambda_ladder } => {
            let fit = integrals::weyl_fit(model, lambda_ladder)?;
            let rows = fit
                .cutoffs
                .iter()
                .zip(&fit.counts)
                .map(|(&l, &n)| Row {
                    ladder_point: l,
                    count: Some(n),
                    value: real(n as f64 / l.powf(model.dimension())),
                })
                .collect();
            Ok(TaskOutput {
                estimator: "weyl".into(),
                operator: String::new(),
                rows,
                value: real(fit.constant),
                verdict: None,
                report: serde_json::to_value(&fit)?,
            })
        }
        TaskKind::TruncatedIntegral { op: src, lambda_ladder } => {
            let ladder = lambda_ladder
                .clone()
                .unwrap_or_else(|| integrals::default_lambda_ladder(model));
            let r = integrals::truncated_integral(model, &op(src)?, &ladder)?;
            estimate_output(model, r, true, measurable_tol)
        }
        TaskKind::LogMeanDiagonal { op: src, horizons } => {
            let h = horizons
                .clone()
                .unwrap_or_else(|| integrals::default_horizons(model));
            let r = integrals::log_mean_diagonal(model, &op(src)?, &h)?;
            estimate_output(model, r, false, measurable_tol)
        }
        TaskKind::DixmierDiagonal { op: src, horizons, d } => {
            let h = horizons
                .clone()
                .unwrap_or_else(|| integrals::default_horizons(model));
            let r = integrals::dixmier_diagonal(model, &op(src)?, *d, &h)?;
            estimate_output(model, r, false, measurable_tol)
        }
        TaskKind::WeightedDixmier { op: src, s, lambda_ladder } => {
            let r = integrals::weighted_dixmier(model, &op(src)?, *s, lambda_ladder)?;
            estimate_output(model, r, true, measurable_tol)
        }
        TaskKind::HeatIntegral { op: src, t_ladder } => {
            let t = t_ladder
                .clone()
                .unwrap_or_else(|| integrals::default_heat_ladder(model));
            let r = integrals::heat_integral(model, &op(src)?, &t)?;
            estimate_output(model, r, false, measurable_tol)
        }
        TaskKind::Frohlich { op: src, beta, t_ladder } => {
            let r = integrals::frohlich(model, &op(src)?, *beta, t_ladder)?;
            estimate_output(model, r, false, measurable_tol)
        }
        TaskKind::Szego {
            op: src,
            function,
            lambda_ladder,
            rhs,
        } => {
            let f = ScalarFunction::from(function);
            let r = ergo::szego_functional_with(model, &op(src)?, &f, lambda_ladder, *rhs)?;
            let mut out = estimate_output(model, r.lhs.clone(), true, measurable_tol)?;
            out.report = serde_json::to_value(&r)?;
            Ok(out)
        }
        TaskKind::Widom {
            op: a,
            op_b: b,
            lambda_ladder,
        } => {
            let r = ergo::widom_ratio(model, &op(a)?, &op(b)?, lambda_ladder)?;
            let rows = r
                .points
                .iter()
                .map(|p| Row {
                    ladder_point: p.lambda,
                    count: Some(p.count),
                    value: real(p.ratio),
                })
                .collect();
            Ok(TaskOutput {
                estimator: "widom".into(),
                operator: format!("{}; {}", r.operators[0], r.operators[1]),
                rows,
                value: real(r.points.last().map_or(0.0, |p| p.ratio)),
                verdict: Some(if r.halves_per_doubling {
                    "halves per doubling".into()
                } else {
                    "does not halve per doubling".into()
                }),
                report: serde_json::to_value(&r)?,
            })
        }
        TaskKind::Qe {
            op: src,
            lambda_ladder,
            tau,
        } => {
            let q = ergo::qe_statistics(model, &op(src)?, lambda_ladder, *tau)?;
            let rows = q
                .ladder
                .iter()
                .zip(&q.counts)
                .zip(&q.variance)
                .map(|((&l, &n), &v)| Row {
                    ladder_point: l,
                    count: Some(n),
                    value: real(v),
                })
                .collect();
            Ok(TaskOutput {
                estimator: "qe".into(),
                operator: q.operator.clone(),
                rows,
                value: real(*q.variance.last().unwrap()),
                verdict: Some(q.verdict.to_string()),
                report: serde_json::to_value(&q)?,
            })
        }
        TaskKind::TimeAverage {
            op: src,
            t_ladder,
            lambda,
            horizon,
        } => {
            let r = ergo::time_average_criterion(model, &op(src)?, t_ladder, *lambda, *horizon)?;
            let lhs: Vec<Complex64> = r.lhs.iter().map(|&x| real(x)).collect();
            Ok(TaskOutput {
                estimator: "time_average".into(),
                operator: r.operator.clone(),
                rows: plain_rows(&r.t_ladder, &lhs),
                value: *lhs.last().unwrap(),
                verdict: Some(
                    if r.consistent {
                        "ergodicity-consistent"
                    } else {
                        "ergodicity-violated"
                    }
                    .into(),
                ),
                report: serde_json::to_value(&r)?,
            })
        }
    }
}

/// Checks an assertion against a task's primary value and verdict.
pub fn check_assertion(a: &Assertion, value: Complex64, verdict: Option<&str>) -> AssertionOutcome {
    let mut passed = true;
    let mut parts = Vec::new();
    if let Some(target) = a.value {
        let err = (value - real(target)).norm();
        let mut tol = a.abs_tol.unwrap_or(0.0);
        if let Some(rel) = a.rel_tol {
            tol = tol.max(rel * target.abs());
        }
        let ok = err <= tol;
        passed &= ok;
        parts.push(format!("|{value} - {target}| = {err:.3e} vs tol {tol:.3e}"));
    }
    if let Some(expected) = &a.verdict {
        let ok = verdict == Some(expected.as_str());
        passed &= ok;
        parts.push(format!("verdict {:?} vs expected {expected:?}", verdict.unwrap_or("none")));
    }
    AssertionOutcome {
        passed,
        detail: parts.join("; "),
    }
}

/// Writes the rows of one task as CSV.
pub fn write_csv(path: &Path, model: &str, out: &TaskOutput) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in &out.rows {
        w.write_record([
            SCHEMA_VERSION.to_string(),
            out.estimator.clone(),
            model.to_string(),
            out.operator.clone(),
            format!("{}", r.ladder_point),
            r.count.map(|n| n.to_string()).unwrap_or_default(),
            format!("{}", r.value.re),
            format!("{}", r.value.im),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn run_one(model: &SpectralModel, task: &Task, cfg: &ExperimentConfig, dir: &Path) -> Result<TaskResult> {
    log::info!("running task `{}` ({})", task.id, task.kind.estimator());
    let out = run_task(model, &task.kind, cfg.measurable_tol)?;
    let csv = dir.join(format!("{}.csv", task.id));
    write_csv(&csv, model.name(), &out)?;
    let assertion = task
        .assertion
        .as_ref()
        .map(|a| check_assertion(a, out.value, out.verdict.as_deref()));
    Ok(TaskResult {
        id: task.id.clone(),
        estimator: out.estimator,
        operator: out.operator,
        csv,
        value: out.value,
        verdict: out.verdict,
        assertion,
        report: out.report,
    })
}

/// Runs every task in order and writes `summary.json`; `out_dir` overrides the config.
///
/// Module errors abort the run; failed assertions are reported in the summary.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<Summary> {
    cfg.validate()?;
    let mut model = SpectralModel::from_descriptor(&cfg.model)?;
    if let Some(l) = cfg.limits {
        model = model.with_limits(l);
    }
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output_dir.clone());
    fs::create_dir_all(&dir)?;
    let results = cfg
        .estimators
        .iter()
        .map(|t| run_one(&model, t, cfg, &dir))
        .collect::<Result<Vec<_>>>()?;
    let passed = results
        .iter()
        .all(|r| r.assertion.as_ref().is_none_or(|a| a.passed));
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        model: cfg.model.clone(),
        passed,
        results,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// JSON record for a failed run.
pub fn error_record(e: &Error) -> serde_json::Value {
    serde_json::json!({
        "error": e.kind(),
        "message": e.to_string(),
        "exit_code": e.exit_code(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::config::ExperimentConfig;

    fn config(tasks: &str) -> ExperimentConfig {
        ExperimentConfig::from_json(&format!(
            r#"{{"schema_version": 1, "model": {{"name": "circle"}}, "estimators": [{tasks}]}}"#
        ))
        .unwrap()
    }

    #[test]
    fn empty_task_list_gives_empty_summary() {
        let dir = tempfile::tempdir().unwrap();
        let s = run_experiment(&config(""), Some(dir.path())).unwrap();
        assert!(s.results.is_empty());
        assert_eq!(s.exit_code(), 0);
        assert!(dir.path().join("summary.json").exists());
    }

    #[test]
    fn failed_assertion_gives_exit_code_4() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(
            r#"{"id": "p", "estimator": "truncated_integral", "op": "proj_pos",
                "lambda_ladder": [10, 20], "assert": {"value": 0.25, "abs_tol": 0.01}}"#,
        );
        let s = run_experiment(&cfg, Some(dir.path())).unwrap();
        assert!(!s.passed);
        assert_eq!(s.exit_code(), 4);
    }

    #[test]
    fn resource_cap_gives_exit_code_3() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(r#"{"id": "big", "estimator": "truncated_integral", "op": "id", "lambda_ladder": [1e9]}"#);
        let e = run_experiment(&cfg, Some(dir.path())).unwrap_err();
        assert_eq!(e.exit_code(), 3);
        assert_eq!(error_record(&e)["error"], "resource-limit");
    }

    #[test]
    fn bad_expression_gives_exit_code_2() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(r#"{"id": "x", "estimator": "truncated_integral", "op": "u(1, 0)", "lambda_ladder": [4]}"#);
        assert_eq!(run_experiment(&cfg, Some(dir.path())).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn csv_bodies_are_deterministic() {
        let cfg = config(
            r#"{"id": "h", "estimator": "heat_integral", "op": "proj_pos + mult(0, 1, 1)", "t_ladder": [0.1, 0.01]},
               {"id": "w", "estimator": "widom", "op": "mult(0, 1)", "op_b": "mult(0, 0, 1)", "lambda_ladder": [8, 16]}"#,
        );
        let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
        run_experiment(&cfg, Some(a.path())).unwrap();
        run_experiment(&cfg, Some(b.path())).unwrap();
        for f in ["h.csv", "w.csv"] {
            let x = fs::read(a.path().join(f)).unwrap();
            assert_eq!(x, fs::read(b.path().join(f)).unwrap());
            assert!(String::from_utf8(x).unwrap().starts_with("schema_version,estimator"));
        }
    }
}
