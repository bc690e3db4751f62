//! Matrix-free paraproducts: the adjoint check and L^2 norm estimates for
//! each variant on vector and matrix inputs.

use paralab::dyadic::{Column, Square};
use paralab::paraproduct::{paraproduct_l2_norm, ParaproductOperator, Variant};
use paralab::sampling::{random_symbol, rng, SymbolDistribution};
use paralab::spectral::{adjoint_defect, operator_norm_power, PowerOptions};
use paralab::symbol::SymbolReport;

fn main() -> paralab::Result<()> {
    let b = random_symbol(&mut rng(5), 2, 5, SymbolDistribution { contractive: true })?;
    let opts = PowerOptions::with_seed(1);
    println!("{:?}", SymbolReport::compute(&b)?);
    println!("||pi_b|| on L2(C^n) = {:.6}", paraproduct_l2_norm(&b, &opts)?.value);
    for variant in [Variant::Plain, Variant::Tilde, Variant::Adjoint] {
        let op = ParaproductOperator::<Square>::new(&b, variant)?;
        let est = operator_norm_power(&op, &opts)?;
        println!("{variant:?} on L2(M_n): {:.6}, adjoint defect {:.1e}", est.value, adjoint_defect(&op, 4, 2)?);
    }
    let op = ParaproductOperator::<Column>::new(&b, Variant::Adjoint)?;
    println!("Adjoint on L2(C^n): {:.6}", operator_norm_power(&op, &opts)?.value);
    Ok(())
}
