//! L^inf, column/row BMO norms, the sweep and the square function of a symbol.

use paralab::sampling::{random_symbol, rng, SymbolDistribution};
use paralab::symbol::{bmo_c_argmax, bmo_c_norm, square_function, sweep, SymbolReport};

fn main() -> paralab::Result<()> {
    let b = random_symbol(&mut rng(4), 3, 4, SymbolDistribution { contractive: true })?;
    let r = SymbolReport::compute(&b)?;
    println!("n = {}, depth = {}", r.n, r.depth);
    println!("linf = {:.6}  bmo_c = {:.6}  bmo_r = {:.6}  bmo_cr = {:.6}", r.linf, r.bmo_c, r.bmo_r, r.bmo_cr);
    let arg = bmo_c_argmax(&b)?;
    println!("bmo_c attained at level {}, atom {}", arg.level, arg.atom);
    println!("||S^2(b)||_bmo_c = {:.6}", bmo_c_norm(&sweep(&b))?);
    println!("||S(b)||_bmo_c   = {:.6}", bmo_c_norm(&square_function(&b)?)?);
    Ok(())
}
