//! QE variance ladders and density-one extraction.
//!
//! On the flat 2-torus the eigenbasis is the Fourier basis, and the diagonal of a
//! zeroth-order angular symbol equidistributes over directions, not to a constant.

use nctrunc::ergo::{extract_density_one, qe_statistics, TauSource};
use nctrunc::expr::compile_str;
use nctrunc::integrals::diagonal_prefix;
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let toe = SpectralModel::toeplitz();
    let a = compile_str("toeplitz(0.25, 1, 1)", &toe)?;
    let q = qe_statistics(&toe, &a, &[64.0, 256.0, 1024.0], TauSource::LogMean)?;
    println!("toeplitz: V = {:?} -> {}", q.variance, q.verdict);

    let torus = SpectralModel::flat_torus(2)?;
    let g = compile_str("angular(x1^2 - x2^2)", &torus)?;
    let q = qe_statistics(&torus, &g, &[25.0, 50.0, 100.0], TauSource::LogMean)?;
    println!("flat torus: V = {:?} -> {}", q.variance, q.verdict);

    let h = compile_str("angular(x1*x2)", &torus)?;
    let (_, diag) = diagonal_prefix(&torus, &h, 20_000)?;
    let d = extract_density_one(&diag, 0.0.into(), &[0.5, 0.25, 0.1])?;
    println!(
        "angular(x1*x2): breakpoints {:?}, density {:.4}, {}",
        d.breakpoints, d.density, d.verdict
    );
    Ok(())
}
