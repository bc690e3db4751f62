//! Seeded random instances: Gaussian matrices, unitaries, unit vectors and
//! random symbols for fuzzing.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{CMatrix, HaarDecomposition, MatrixStepFunction, StepFunction, ValueKind};
use crate::error::Result;
use crate::spectral::{dual_unitary, gaussian_flat};
use crate::symbol::linf_norm;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_vec(rows, cols, gaussian_flat(rng, rows * cols))
}

pub fn real_gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
    DVector::from_iterator(n, gaussian_flat(rng, n).into_iter().map(|z| Complex64::new(z.re, 0.0)))
}

pub fn unit_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<Complex64> {
    let v = DVector::from_vec(gaussian_flat(rng, n));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Unitary polar factor of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> Result<CMatrix> {
    dual_unitary(&gaussian_matrix(rng, n, n))
}

/// Step function with i.i.d. complex Gaussian values on the finest atoms.
pub fn gaussian_step<K: ValueKind>(rng: &mut ChaCha8Rng, n: usize, depth: usize) -> StepFunction<K> {
    StepFunction::from_fn(n, depth, |_| gaussian_matrix(rng, n, K::cols(n)))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SymbolDistribution {
    /// Rescale so that `||b||_inf <= 1`.
    pub contractive: bool,
}

/// Random matrix symbol built from Gaussian Haar coefficients, the level-`k`
/// coefficients scaled by `k^(-1/2)`.
pub fn random_symbol(
    rng: &mut ChaCha8Rng,
    n: usize,
    depth: usize,
    dist: SymbolDistribution,
) -> Result<MatrixStepFunction> {
    let mean = gaussian_matrix(rng, n, n);
    let layers: Vec<Vec<CMatrix>> = (1..=depth)
        .map(|k| {
            let scale = Complex64::new((k as f64).powf(-0.5), 0.0);
            (0..1usize << (k - 1)).map(|_| gaussian_matrix(rng, n, n) * scale).collect()
        })
        .collect();
    let b = HaarDecomposition::synthesize(n, depth, &mean, &layers);
    if dist.contractive {
        let norm = linf_norm(&b)?;
        if norm > 1.0 {
            return Ok(b.scale(Complex64::new(1.0 / norm, 0.0)));
        }
    }
    Ok(b)
}

/// Random PSD function constant on level-`m` atoms.
pub fn random_psd_measurable(rng: &mut ChaCha8Rng, n: usize, depth: usize, m: usize) -> Result<MatrixStepFunction> {
    let coarse: Vec<CMatrix> = (0..1usize << m)
        .map(|_| {
            let g = gaussian_matrix(rng, n, n);
            // occasional rank deficiency
            if rng.random_bool(0.2) {
                let v = g.column(0).clone_owned();
                &v * v.adjoint()
            } else {
                g.adjoint() * g
            }
        })
        .collect();
    StepFunction::from_level_values(n, depth, m, &coarse)
}

/// Independent per-sample seed derived from a run seed (SplitMix64 step).
pub fn sample_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mean-zero symbol whose Haar coefficients are rank-one matrices `u v^*`
/// (unit `u`, `v`), each present with probability `density`.
pub fn random_sparse_symbol(rng: &mut ChaCha8Rng, n: usize, depth: usize, density: f64) -> MatrixStepFunction {
    let layers: Vec<Vec<CMatrix>> = (1..=depth)
        .map(|k| {
            (0..1usize << (k - 1))
                .map(|_| {
                    let u = unit_vector(rng, n);
                    let v = unit_vector(rng, n);
                    if rng.random_bool(density) {
                        &u * v.adjoint()
                    } else {
                        CMatrix::zeros(n, n)
                    }
                })
                .collect()
        })
        .collect();
    HaarDecomposition::synthesize(n, depth, &CMatrix::zeros(n, n), &layers)
}
