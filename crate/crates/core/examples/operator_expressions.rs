//! Parsing operator expressions and looking at their truncations.

use nctrunc::expr::{compile, parse};
use nctrunc::models::SpectralModel;
use nctrunc::trunc::truncate;

fn main() -> nctrunc::Result<()> {
    let torus = SpectralModel::nc_torus(2, vec![vec![0.0, 0.5], vec![-0.5, 0.0]])?;
    for (name, sig) in torus.generator_signatures() {
        println!("{name}({sig})");
    }
    let e = parse("pow(u(1, 0) + adj(u(1, 0)), 2) - 2 * id")?;
    println!("parsed: {e}");
    let a = compile(&e, &torus)?;
    let t = truncate(&torus, &a, 3.0)?;
    println!(
        "P A P at λ ≤ {}: {} modes, trace {:.4}, hermitian defect {:.1e}",
        t.cutoff,
        t.size(),
        t.trace().re,
        t.hermitian_defect()
    );
    let mut dump = Vec::new();
    t.write_dump(&mut dump)?;
    let (header, _) = nctrunc::trunc::read_dump(dump.as_slice())?;
    println!("dump header: {}", serde_json::to_string(&header)?);

    match parse("mult(0, 1") {
        Ok(_) => unreachable!(),
        Err(err) => println!("error (exit code {}): {err}", err.exit_code()),
    }
    Ok(())
}
