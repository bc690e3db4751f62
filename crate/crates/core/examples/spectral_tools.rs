//! SVD, Schatten norms, dual unitaries and power iteration on a dense operator.

use paralab::dyadic::CMatrix;
use paralab::sampling::{gaussian_matrix, rng};
use paralab::spectral::{dual_unitary, operator_norm_power, schatten_norm, singular_values, DenseOperator, PowerOptions};
use paralab::Complex64;

fn main() -> paralab::Result<()> {
    let a: CMatrix = gaussian_matrix(&mut rng(2), 4, 4);
    let s = singular_values(&a)?;
    println!("singular values: {s:.6?}");
    for p in [1.0, 2.0, f64::INFINITY] {
        println!("||A||_S{p} = {:.6}", schatten_norm(&a, p)?);
    }
    let v = dual_unitary(&a)?;
    let pairing: Complex64 = (&v * &a).trace();
    println!("tr(VA) = {:.6} (equals the S1 norm)", pairing.re);

    let est = operator_norm_power(&DenseOperator { matrix: a }, &PowerOptions::with_seed(3))?;
    println!("power iteration: {:.9} ({:?}, {} iterations)", est.value, est.certification, est.iterations);
    Ok(())
}
