//! `Tr_ω(Q <D>^{-d})` from weighted partial traces, with `Q = <D>^s`.

use nctrunc::integrals::weighted_dixmier;
use nctrunc::models::SpectralModel;

fn main() -> nctrunc::Result<()> {
    let circle = SpectralModel::circle();
    for (s, ladder) in [(1.0, vec![500.0, 1000.0, 2000.0]), (-1.0, vec![1e3, 1e4, 1e5])] {
        let r = weighted_dixmier(&circle, &circle.bracket_power(s), s, &ladder)?;
        println!("s = {s:+}: {:?}", r.values.iter().map(|z| z.re).collect::<Vec<_>>());
        println!("  omega_log_mean {:.5}", r.secondary["omega_log_mean"]);
    }
    Ok(())
}
