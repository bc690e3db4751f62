//! Haar decomposition, conditional expectations and Parseval on a random
//! matrix-valued step function.

use paralab::dyadic::{conditional_expectation, haar_decompose, HaarDecomposition, MatrixStepFunction};
use paralab::sampling::{gaussian_step, rng};

fn main() -> paralab::Result<()> {
    let f: MatrixStepFunction = gaussian_step(&mut rng(1), 2, 3);
    let dec = haar_decompose(&f);
    let layers: Vec<_> = dec.layers.iter().map(|l| l.coefficients().to_vec()).collect();
    let back: MatrixStepFunction = HaarDecomposition::synthesize(2, 3, &dec.mean, &layers);
    println!("reconstruction error: {:.2e}", back.max_abs_diff(&f)?);

    let mut energy = dec.mean.norm_squared();
    for k in 1..=3 {
        let d = dec.layer(k).expand(3)?;
        energy += d.l2_norm().powi(2);
    }
    println!("||f||^2 = {:.12}, mean + sum ||d_k f||^2 = {energy:.12}", f.l2_norm().powi(2));

    for k in 0..=3 {
        let e = conditional_expectation(&f, k)?;
        println!("E_{k} f is F_{k}-measurable: defect {:.1e}", e.measurability_defect(k)?);
    }
    Ok(())
}
