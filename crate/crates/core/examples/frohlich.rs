use nctrunc::expr::compile_str;
use nctrunc::integrals::frohlich;
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let circle = SpectralModel::circle();
    let p = compile_str("proj_pos", &circle)?;
    let r = frohlich(&circle, &p, 0.0, &[1e-1, 1e-2, 1e-3])?;
    for (t, v) in r.ladder.iter().zip(&r.values) {
        // Geometric sums give exactly 1/(1 + e^{-t}).
        println!("t = {t:e}  {:.8}  exact {:.8}", v.re, 1.0 / (1.0 + (-t).exp()));
    }
    println!("truncated integral {:.6}", r.secondary["truncated_integral"]);
    Ok(())
}
