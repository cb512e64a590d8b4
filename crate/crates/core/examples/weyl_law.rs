//! Weyl-law fits of the counting function on every bundled model.
//!
//! ```text
//! cargo run --example weyl_law
//! ```

use nctrunc::cli::parse_model;
use nctrunc::integrals::weyl_fit;

fn main() -> nctrunc::Result<()> {
    for (name, ladder) in [
        ("circle", vec![250.0, 500.0, 1000.0, 2000.0]),
        ("toeplitz", vec![250.0, 500.0, 1000.0, 2000.0]),
        ("flat_torus:2", vec![50.0, 100.0, 200.0]),
        ("flat_torus:3", vec![10.0, 20.0, 40.0]),
        ("nc_torus:0.7", vec![50.0, 100.0, 200.0]),
        ("almost_commutative:1,2", vec![25.0, 50.0, 100.0]),
    ] {
        let model = nctrunc::models::SpectralModel::from_descriptor(&parse_model(name)?)?;
        let fit = weyl_fit(&model, &ladder)?;
        println!(
            "{name:<24} d = {}  N(λ)/λ^d = {:.5}  fitted = {:.5}  Tr_ω(<D>^-d) ≈ {:.5}",
            fit.dimension,
            fit.constant,
            fit.fitted_prefactor,
            fit.implied_trace()
        );
    }
    Ok(())
}
