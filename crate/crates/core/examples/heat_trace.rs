use nctrunc::expr::compile_str;
use nctrunc::integrals::{default_heat_ladder, heat_integral};
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let torus = SpectralModel::flat_torus(2)?;
    let a = compile_str("angular(x1^2) + 0.25", &torus)?;
    let r = heat_integral(&torus, &a, &default_heat_ladder(&torus))?;
    for (t, v) in r.ladder.iter().zip(&r.values) {
        println!("t = {t:e}  Tr(A e^(-tD²))/Tr(e^(-tD²)) = {:.6}", v.re);
    }
    for (k, v) in &r.secondary {
        println!("{k} = {v:.6}");
    }
    Ok(())
}
