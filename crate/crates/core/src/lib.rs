//! Spectral truncations of spectral triples.
//!
//! The crate builds finite compressions `P_λ A P_λ` of operators on a small
//! catalog of spectral triples (circle, noncommutative torus, Toeplitz,
//! almost-commutative torus) and evaluates the functionals that approximate the
//! noncommutative integral: truncated means, logarithmic-mean Dixmier
//! approximants, heat-trace estimates, weighted Dixmier formulas, Szegő limits,
//! Widom ratios, Fröhlich functionals and quantum-ergodicity diagnostics.
//!
//! ```
//! use nctrunc::{expr, integrals, models::SpectralModel};
//!
//! let circle = SpectralModel::circle();
//! let a = expr::compile_str("proj_pos", &circle).unwrap();
//! let report = integrals::truncated_integral(&circle, &a, &[64.0, 128.0, 256.0]).unwrap();
//! assert!((report.value.re - 0.5).abs() < 1e-2);
//! ```

pub mod cli;
pub mod ergo;
pub mod error;
pub mod expr;
pub mod integrals;
pub mod models;
pub mod numeric;
pub mod oracle;
pub mod seq;
pub mod trunc;

pub use error::{Error, Result};
