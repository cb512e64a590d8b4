//! Cesàro and logarithmic means, and the log-mean / Dixmier estimators built on them.

use nctrunc::expr::compile_str;
use nctrunc::integrals::{dixmier_diagonal, log_mean_diagonal};
use nctrunc::models::SpectralModel;
use nctrunc::oracle::MatrixOracle;
use nctrunc::seq::{cesaro, log_cesaro_gap, log_mean, normalized_log_mean, SummabilitySeries};

fn main() -> nctrunc::Result<()> {
    let n = 100_000;
    let alternating = SummabilitySeries::from_fn(n, |k| (k % 2 == 0) as u8 as f64)?;
    println!("x = 1,0,1,0,…  at n = {n}");
    println!("  C(x)      {:.6}", cesaro(&alternating).values()[n].re);
    println!("  M(x) raw  {:.6}", log_mean(&alternating).values()[n].re);
    println!("  M(x)      {:.6}", normalized_log_mean(&alternating).values()[n].re);
    println!("  |M(x) - M(C(x))| = {:.2e}", log_cesaro_gap(&alternating, n)?);

    let circle = SpectralModel::circle();
    let a = compile_str("mult(1, 0.5, 0.5) * mult(0, 1, 1)", &circle)?;
    let r = log_mean_diagonal(&circle, &a, &[1_000, 10_000, 100_000])?;
    println!("log mean of diag {}: {:?}", a.description(), r.values);

    let torus = SpectralModel::flat_torus(2)?;
    let d = dixmier_diagonal(&torus, &MatrixOracle::identity(), None, &[1_000, 10_000, 100_000])?;
    println!("flat 2-torus dixmier_diagonal(1):");
    for (h, v) in d.ladder.iter().zip(&d.values) {
        let bias_model = 2.0 * std::f64::consts::PI * (1.0 - (2.0 * std::f64::consts::PI).ln() / h.ln());
        println!("  n = {h:>7}  {:.4}  (2π(1 - ln 2π/ln n) = {bias_model:.4})", v.re);
    }
    Ok(())
}
