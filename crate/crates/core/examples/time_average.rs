use nctrunc::ergo::time_average_criterion;
use nctrunc::expr::compile_str;
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let ts = [1.0, 10.0, 100.0];
    let circle = SpectralModel::circle();
    let e = compile_str("mult(0, 0, 1)", &circle)?;
    let r = time_average_criterion(&circle, &e, &ts, 64.0, 10_000)?;
    for (t, l) in ts.iter().zip(&r.lhs) {
        let closed = r.c_hat * (2.0 * (t / 2.0).sin() / t).powi(2);
        println!("circle T = {t:>5}: lhs {l:.8}  closed form {closed:.8}");
    }
    println!("  {}", r.verdict);

    let torus = SpectralModel::flat_torus(2)?;
    let g = compile_str("angular(x1^2 - x2^2)", &torus)?;
    let r = time_average_criterion(&torus, &g, &ts, 100.0, 10_000)?;
    println!("flat torus levels {:?}, |τ|² = {:.4}: {}", r.levels, r.tau.norm_sqr(), r.verdict);
    Ok(())
}
