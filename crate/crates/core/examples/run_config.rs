//! Runs the bundled experiment config and prints its summary.
//!
//! ```text
//! cargo run --example run_config -- configs/szego_toeplitz.json /tmp/out
//! ```

use std::path::PathBuf;

use nctrunc::cli::{run_experiment, ExperimentConfig};

fn main() -> nctrunc::Result<()> {
    let mut args = std::env::args().skip(1);
    let path = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/szego_toeplitz.json")));
    let out = args.next().map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let cfg = ExperimentConfig::from_path(&path)?;
    let summary = run_experiment(&cfg, Some(&out))?;
    for r in &summary.results {
        println!("{}", serde_json::to_string(r)?);
    }
    println!("passed: {} (CSV in {})", summary.passed, out.display());
    std::process::exit(summary.exit_code());
}
