//! Certified lower bounds for L^p(S^p) operator norms of paraproducts and
//! tail multipliers, found by ascent.

use paralab::paraproduct::{lp_norm_lower_bound_variant, lp_ratio_search, multiplier_handle, AscentOptions, Side, Variant};
use paralab::sampling::{random_symbol, rng, SymbolDistribution};

fn main() -> paralab::Result<()> {
    let b = random_symbol(&mut rng(9), 2, 3, SymbolDistribution { contractive: true })?;
    let opts = AscentOptions::with_seed(1);
    for p in [1.5, 2.0, 3.0] {
        for variant in [Variant::Plain, Variant::Tilde] {
            let w = lp_norm_lower_bound_variant(&b, variant, p, &opts)?;
            println!("p = {p}, {variant:?}: >= {:.6} ({:?})", w.estimate.value, w.estimate.certification);
        }
    }
    for m in 0..=3 {
        let op = multiplier_handle(&b, m, Side::Left)?;
        let w = lp_ratio_search(&op, 2.0, &opts)?;
        println!("left tail multiplier, m = {m}: >= {:.6}", w.estimate.value);
    }
    Ok(())
}
