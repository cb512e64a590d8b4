//! Experiment configuration, batch runner and helpers for the command-line front end.

pub mod config;
pub mod runner;

pub use config::{Assertion, ExperimentConfig, FunctionSpec, Task, TaskKind, SCHEMA_VERSION};
pub use runner::{run_experiment, run_task, Summary, TaskResult, CSV_HEADER};

use crate::error::{Error, Result};
use crate::models::{MatrixEntry, ModelDescriptor};

/// Parses a model shorthand or an inline JSON descriptor.
///
/// Shorthands: `circle`, `toeplitz`, `flat_torus:D`, `nc_torus:THETA` (d = 2) and
/// `almost_commutative:d1,d2,…` (diagonal `D_F`).
pub fn parse_model(src: &str) -> Result<ModelDescriptor> {
    let src = src.trim();
    if src.starts_with('{') {
        return Ok(serde_json::from_str(src)?);
    }
    let (name, arg) = src.split_once(':').unwrap_or((src, ""));
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse()
            .map_err(|_| Error::invalid(format!("model `{src}`: `{s}` is not a number")))
    };
    match (name, arg.is_empty()) {
        ("circle", true) => Ok(ModelDescriptor::Circle),
        ("toeplitz", true) => Ok(ModelDescriptor::Toeplitz),
        ("flat_torus", _) => Ok(ModelDescriptor::NcTorus {
            d: if arg.is_empty() { 2 } else { num(arg)? as usize },
            theta: None,
            angular_origin: 0.0,
        }),
        ("nc_torus", false) => {
            let t = num(arg)?;
            Ok(ModelDescriptor::NcTorus {
                d: 2,
                theta: Some(vec![vec![0.0, t], vec![-t, 0.0]]),
                angular_origin: 0.0,
            })
        }
        ("almost_commutative", false) => {
            let diag = arg.split(',').map(num).collect::<Result<Vec<_>>>()?;
            let n = diag.len();
            let d_f = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| MatrixEntry::Real(if i == j { diag[i] } else { 0.0 }))
                        .collect()
                })
                .collect();
            Ok(ModelDescriptor::AlmostCommutative { d_f })
        }
        _ => Err(Error::invalid(format!("unknown model `{src}`"))),
    }
}

/// Parses a comma-separated list of numbers.
pub fn parse_ladder(src: &str) -> Result<Vec<f64>> {
    src.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::invalid(format!("ladder entry `{s}` is not a number")))
        })
        .collect()
}
