//! The contractive witness symbol for uniform vectors: its pairing with the
//! test functions equals the S^1 norm of the truncated outer product.

use paralab::extremal::{paraproduct_pairing, tensor_identity_check, uniform_unit, uniform_witness};
use paralab::paraproduct::paraproduct_l2_norm;
use paralab::spectral::{schatten_norm, PowerOptions};
use paralab::symbol::linf_norm;

fn main() -> paralab::Result<()> {
    for n in [2, 4, 8] {
        let w = uniform_witness(n)?;
        let u = uniform_unit(n);
        let pairing = paraproduct_pairing(&w.b, &w.f, &w.g)?;
        println!("n = {n}");
        println!("  tensor identity defect   {:.1e}", tensor_identity_check(&u, &u)?);
        println!("  ||b||_inf                {:.12}", linf_norm(&w.b)?);
        println!("  <pi_b f, g>              {:.12}", pairing.re);
        println!("  ||T(a (x) b)||_S1        {:.12}", schatten_norm(&w.m, 1.0)?);
        println!("  ||pi_b|| (power)         {:.6}", paraproduct_l2_norm(&w.b, &PowerOptions::with_seed(1))?.value);
    }
    Ok(())
}
