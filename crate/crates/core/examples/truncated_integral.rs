//! Truncated means `Tr(P A P)/Tr(P)` along a cutoff ladder.

use nctrunc::expr::compile_str;
use nctrunc::integrals::{default_lambda_ladder, truncated_integral};
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let circle = SpectralModel::circle();
    let theta = vec![vec![0.0, 0.7], vec![-0.7, 0.0]];
    let torus = SpectralModel::nc_torus(2, theta)?;
    let cases = [
        (&circle, "pow(mult(0, 1, 1), 2)"),
        (&circle, "proj_pos"),
        (&torus, "adj(u(1, 2)) * u(1, 2) + 0.5 * u(1, 0)"),
    ];
    for (model, src) in cases {
        let a = compile_str(src, model)?;
        let r = truncated_integral(model, &a, &default_lambda_ladder(model))?;
        println!("{} {src}", model.name());
        for (l, v) in r.ladder.iter().zip(&r.values) {
            println!("  λ = {l:>6}  {:.8}", v.re);
        }
        println!("  drift {:.2e}  measurable {}", r.drift, r.measurable);
    }
    Ok(())
}
