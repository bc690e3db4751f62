//! John-Nirenberg quantities: at q = 2 they reproduce BMO_cr, for other q
//! they are ascent lower bounds.

use paralab::paraproduct::{jn_quantity, JnOptions};
use paralab::sampling::{random_symbol, rng, SymbolDistribution};
use paralab::symbol::bmo_cr_norm;

fn main() -> paralab::Result<()> {
    let b = random_symbol(&mut rng(8), 2, 4, SymbolDistribution { contractive: false })?;
    println!("bmo_cr = {:.12}", bmo_cr_norm(&b)?);
    for q in [1.5, 2.0, 4.0] {
        println!("jn(q = {q}) = {:.12}", jn_quantity(&b, q, &JnOptions::with_seed(1))?);
    }
    Ok(())
}
