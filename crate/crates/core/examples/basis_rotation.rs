//! QE variance before and after rotating each degenerate eigenspace by a Haar unitary.

use nctrunc::ergo::basis_rotation_experiment;
use nctrunc::expr::compile_str;
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let torus = SpectralModel::flat_torus(2)?;
    let g = compile_str("angular(x1^2 - x2^2)", &torus)?;
    let r = basis_rotation_experiment(&torus, &g, 20.0, &[1, 2, 3])?;
    println!("standard basis variance {:.5}", r.standard_variance);
    println!("rotated bases variance  {:?}", r.rotated_variance);
    for (mult, count) in &r.multiplicities {
        println!("  {count} eigenspaces of multiplicity {mult}");
    }
    Ok(())
}
