//! First Szegő theorem for the tridiagonal Toeplitz matrix with symbol 2cosθ.
//!
//! `Tr(T_n²)/(n+1) = 2n/(n+1)` exactly, against `(1/2π)∫(2cosθ)² dθ = 2`.

use nctrunc::ergo::{szego_functional_with, ScalarFunction, TauSource};
use nctrunc::expr::compile_str;
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let toe = SpectralModel::toeplitz();
    let a = compile_str("toeplitz(0, 1, 1)", &toe)?;
    let ladder = [200.0, 500.0, 1000.0, 2000.0];
    for p in 1..=4 {
        let r = szego_functional_with(&toe, &a, &ScalarFunction::monomial(p), &ladder, TauSource::Truncated)?;
        println!("x^{p}: lhs {:.6}  rhs {:.6}  gap {:.2e}", r.lhs.value.re, r.rhs.re, r.gap);
    }
    let cubic_root = ScalarFunction::custom("cbrt", f64::cbrt);
    let r = szego_functional_with(&toe, &a, &cubic_root, &ladder, TauSource::LogMean)?;
    println!("cbrt: lhs {:.6}  rhs {:.6} (approximate rhs: {})", r.lhs.value.re, r.rhs.re, r.approximate_rhs);
    Ok(())
}
