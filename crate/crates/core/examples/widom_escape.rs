use nctrunc::ergo::widom_ratio;
use nctrunc::expr::compile_str;
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let circle = SpectralModel::circle();
    let torus = SpectralModel::nc_torus(2, vec![vec![0.0, 0.3], vec![-0.3, 0.0]])?;
    for (model, a, b, ladder) in [
        (&circle, "mult(0, 1)", "mult(0, 0, 1)", vec![50.0, 100.0, 200.0]),
        (&torus, "u(1, 0)", "adj(u(1, 0))", vec![16.0, 32.0, 64.0]),
    ] {
        let r = widom_ratio(model, &compile_str(a, model)?, &compile_str(b, model)?, &ladder)?;
        println!("{} ({a}, {b})", model.name());
        for p in &r.points {
            println!(
                "  λ = {:>5}  N = {:>6}  ratio {:.3e}  HS bound {:.3e}",
                p.lambda, p.count, p.ratio, p.hs_bound
            );
        }
        println!(
            "  doubling factors {:?}, halves: {}, bounded commutators: {}",
            r.doubling_factors, r.halves_per_doubling, r.bounded_commutators
        );
    }
    Ok(())
}
