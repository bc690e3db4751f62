//! Norms and square functions of matrix symbols `b`.
//!
//! Column BMO is `sup_m || E_m sum_{k >= m} (d_k b)^* (d_k b) ||^(1/2)` with
//! `m` ranging over `0..=K`; at `m = 0` the tail starts at `k = 1`.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{
    conditional_expectation, haar_decompose, sum_level_constants, CMatrix, MatrixStepFunction,
};
use crate::error::{Error, Result};
use crate::spectral::{psd_sqrt, spectral_norm, top_eigenpair};

/// `max_j ||b_j||` over finest atoms.
pub fn linf_norm(b: &MatrixStepFunction) -> Result<f64> {
    b.values().iter().try_fold(0.0f64, |acc, v| Ok(acc.max(spectral_norm(v)?)))
}

/// Conditioned tail `E_m sum_{k >= max(m,1)} (d_k b)^*(d_k b)` for every level
/// `m` and level-`m` atom.
pub fn bmo_c_tails(b: &MatrixStepFunction) -> Vec<Vec<CMatrix>> {
    let n = b.n();
    let depth = b.depth();
    let dec = haar_decompose(b);
    let gram: Vec<Vec<CMatrix>> = dec
        .layers
        .iter()
        .map(|l| l.coefficients().iter().map(|c| c.adjoint() * c).collect())
        .collect();
    // strict[l][a] = mean over atom (l, a) of sum_{k > l} (d_k b)^*(d_k b)
    let mut strict = vec![Vec::new(); depth + 1];
    strict[depth] = vec![CMatrix::zeros(n, n); 1usize << depth];
    let half = Complex64::new(0.5, 0.0);
    for l in (0..depth).rev() {
        strict[l] = (0..1usize << l)
            .map(|a| (&strict[l + 1][2 * a] + &strict[l + 1][2 * a + 1]) * half + &gram[l][a])
            .collect();
    }
    let mut tails = Vec::with_capacity(depth + 1);
    tails.push(strict[0].clone());
    for m in 1..=depth {
        tails.push(
            strict[m]
                .iter()
                .enumerate()
                .map(|(a, s)| s + &gram[m - 1][a / 2])
                .collect(),
        );
    }
    tails
}

/// Where the column-BMO supremum is attained.
#[derive(Clone, Debug)]
pub struct BmoArgmax {
    pub value: f64,
    pub level: usize,
    pub atom: usize,
    /// Top eigenvector of the conditioned tail at `(level, atom)`.
    pub vector: DVector<Complex64>,
}

pub fn bmo_c_argmax(b: &MatrixStepFunction) -> Result<BmoArgmax> {
    let mut best: Option<BmoArgmax> = None;
    for (m, level) in bmo_c_tails(b).iter().enumerate() {
        for (a, t) in level.iter().enumerate() {
            let (lambda, v) = top_eigenpair(t)?;
            if best.as_ref().is_none_or(|bst| lambda > bst.value) {
                best = Some(BmoArgmax { value: lambda, level: m, atom: a, vector: v });
            }
        }
    }
    let mut best = best.expect("at least the level-0 tail exists");
    best.value = best.value.max(0.0).sqrt();
    Ok(best)
}

pub fn bmo_c_norm(b: &MatrixStepFunction) -> Result<f64> {
    let mut worst = 0.0f64;
    for level in bmo_c_tails(b) {
        for t in &level {
            worst = worst.max(spectral_norm(t)?);
        }
    }
    Ok(worst.sqrt())
}

/// Row BMO: column BMO of the pointwise adjoint.
pub fn bmo_r_norm(b: &MatrixStepFunction) -> Result<f64> {
    bmo_c_norm(&b.adjoint())
}

pub fn bmo_cr_norm(b: &MatrixStepFunction) -> Result<f64> {
    Ok(bmo_c_norm(b)?.max(bmo_r_norm(b)?))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolReport {
    pub n: usize,
    pub depth: usize,
    pub linf: f64,
    pub bmo_c: f64,
    pub bmo_r: f64,
    pub bmo_cr: f64,
}

impl SymbolReport {
    pub fn compute(b: &MatrixStepFunction) -> Result<Self> {
        let bmo_c = bmo_c_norm(b)?;
        let bmo_r = bmo_r_norm(b)?;
        Ok(Self { n: b.n(), depth: b.depth(), linf: linf_norm(b)?, bmo_c, bmo_r, bmo_cr: bmo_c.max(bmo_r) })
    }
}

/// Sweep function `S^2(b) = sum_k (d_k b)^*(d_k b)`.
pub fn sweep(b: &MatrixStepFunction) -> MatrixStepFunction {
    let dec = haar_decompose(b);
    let per_level: Vec<Vec<CMatrix>> = dec
        .layers
        .iter()
        .map(|l| l.coefficients().iter().map(|c| c.adjoint() * c).collect())
        .collect();
    sum_level_constants(b.n(), b.depth(), &per_level)
}

/// Square function `S(b) = (sum_k |d_k b|^2)^(1/2)`.
pub fn square_function(b: &MatrixStepFunction) -> Result<MatrixStepFunction> {
    let s2 = sweep(b);
    let values = s2.values().iter().map(psd_sqrt).collect::<Result<Vec<_>>>()?;
    MatrixStepFunction::new(b.n(), b.depth(), values)
}

/// `||a||_inf / ||E_{m-1} a||_inf` for a PSD function constant on level-`m` atoms.
pub fn regularity_ratio(a: &MatrixStepFunction, m: usize) -> Result<f64> {
    if m == 0 || m > a.depth() {
        return Err(Error::LevelOutOfRange { level: m, depth: a.depth() });
    }
    let defect = a.measurability_defect(m)?;
    let scale = linf_norm(a)?.max(1.0);
    if defect > 1e-10 * scale {
        return Err(Error::NotMeasurable { level: m, deviation: defect });
    }
    let fine = linf_norm(a)?;
    let coarse = linf_norm(&conditional_expectation(a, m - 1)?)?;
    if coarse == 0.0 {
        return Ok(if fine == 0.0 { 1.0 } else { f64::INFINITY });
    }
    Ok(fine / coarse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::{rademacher, VectorStepFunction};
    use crate::sampling::{random_symbol, random_unitary, rng, SymbolDistribution};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn r1_times(a: &CMatrix, depth: usize) -> MatrixStepFunction {
        MatrixStepFunction::scalar_times(&rademacher(1, depth).unwrap(), a).unwrap()
    }

    fn sample_matrix() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[c(1.0), Complex64::new(0.0, 2.0), c(-0.5), c(0.25)])
    }

    #[test]
    fn linf_cases() {
        let mut g = rng(1);
        let u = random_unitary(&mut g, 3).unwrap();
        let b = MatrixStepFunction::constant(3, 2, u);
        assert!((linf_norm(&b).unwrap() - 1.0).abs() < 1e-12);
        let a = sample_matrix();
        assert!((linf_norm(&r1_times(&a, 3)).unwrap() - spectral_norm(&a).unwrap()).abs() < 1e-12);
        assert_eq!(linf_norm(&MatrixStepFunction::zeros(2, 2)).unwrap(), 0.0);
    }

    #[test]
    fn bmo_of_constant_and_single_level() {
        let b = MatrixStepFunction::constant(2, 3, sample_matrix());
        assert_eq!(bmo_c_norm(&b).unwrap(), 0.0);
        assert_eq!(bmo_r_norm(&b).unwrap(), 0.0);
        let a = sample_matrix();
        let b = r1_times(&a, 3);
        let s = spectral_norm(&a).unwrap();
        assert!((bmo_c_norm(&b).unwrap() - s).abs() < 1e-12);
        assert!((bmo_r_norm(&b).unwrap() - s).abs() < 1e-12);
    }

    #[test]
    fn scalar_two_rademachers() {
        let r1 = rademacher(1, 2).unwrap().scalars().unwrap();
        let r2 = rademacher(2, 2).unwrap().scalars().unwrap();
        let sum: Vec<_> = r1.iter().zip(&r2).map(|(a, b)| a + b).collect();
        let b = MatrixStepFunction::scalar_times(
            &VectorStepFunction::from_scalars(2, &sum).unwrap(),
            &CMatrix::identity(1, 1),
        )
        .unwrap();
        assert!((bmo_c_norm(&b).unwrap() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn rank_one_row_and_column() {
        let mut e12 = CMatrix::zeros(2, 2);
        e12[(0, 1)] = c(1.0);
        let b = r1_times(&e12, 2);
        assert!((bmo_c_norm(&b).unwrap() - 1.0).abs() < 1e-14);
        assert!((bmo_r_norm(&b).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_symbol_row_equals_column() {
        let mut g = rng(2);
        let b = random_symbol(&mut g, 3, 3, SymbolDistribution { contractive: false }).unwrap();
        let h = b.add(&b.adjoint()).unwrap();
        assert!((bmo_c_norm(&h).unwrap() - bmo_r_norm(&h).unwrap()).abs() < 1e-12);
        assert_eq!(bmo_r_norm(&b).unwrap(), bmo_c_norm(&b.adjoint()).unwrap());
    }

    #[test]
    fn report_invariants() {
        let mut g = rng(3);
        for n in 1..=4 {
            for depth in 0..=4 {
                let b = random_symbol(&mut g, n, depth, SymbolDistribution { contractive: n % 2 == 0 }).unwrap();
                let r = SymbolReport::compute(&b).unwrap();
                assert_eq!(r.bmo_cr, r.bmo_c.max(r.bmo_r));
                assert!(r.bmo_c <= 2.0 * r.linf + 1e-8);
                assert!(r.bmo_r <= 2.0 * r.linf + 1e-8);
            }
        }
    }

    #[test]
    fn unitary_invariance() {
        let mut g = rng(4);
        let b = random_symbol(&mut g, 3, 3, SymbolDistribution { contractive: false }).unwrap();
        let u = random_unitary(&mut g, 3).unwrap();
        let right = b.map(|v| v * &u);
        let left = b.map(|v| &u * v);
        assert!((bmo_c_norm(&right).unwrap() - bmo_c_norm(&b).unwrap()).abs() < 1e-12);
        assert!((bmo_r_norm(&left).unwrap() - bmo_r_norm(&b).unwrap()).abs() < 1e-12);
        assert!((linf_norm(&left).unwrap() - linf_norm(&b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sweep_and_square_function() {
        let a = sample_matrix();
        let b = r1_times(&a, 2);
        let s2 = sweep(&b);
        for v in s2.values() {
            assert!((v - a.adjoint() * &a).norm() < 1e-13);
        }
        let s = square_function(&b).unwrap();
        let abs = crate::spectral::abs_matrix(&a).unwrap();
        for v in s.values() {
            assert!((v - &abs).norm() < 1e-10);
        }
        assert_eq!(sweep(&MatrixStepFunction::zeros(2, 3)), MatrixStepFunction::zeros(2, 3));
        let cst = MatrixStepFunction::constant(2, 3, a);
        assert_eq!(square_function(&cst).unwrap(), MatrixStepFunction::zeros(2, 3));
    }

    #[test]
    fn scalar_square_function_matches_direct() {
        let mut g = rng(5);
        let b = random_symbol(&mut g, 1, 4, SymbolDistribution { contractive: false }).unwrap();
        let vals: Vec<Complex64> = b.values().iter().map(|v| v[(0, 0)]).collect();
        // direct: d_k b on finest atom j is mean over level-k atom minus mean over level-(k-1) atom
        let mean = |k: usize, j: usize| -> Complex64 {
            let span = 1usize << (4 - k);
            let start = (j / span) * span;
            vals[start..start + span].iter().sum::<Complex64>() / span as f64
        };
        let s = square_function(&b).unwrap();
        for j in 0..16 {
            let direct: f64 = (1..=4).map(|k| (mean(k, j) - mean(k - 1, j)).norm_sqr()).sum::<f64>().sqrt();
            assert!((s.value(j)[(0, 0)].re - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn sweep_squares_square_function() {
        let mut g = rng(6);
        let b = random_symbol(&mut g, 3, 3, SymbolDistribution { contractive: false }).unwrap();
        let s = square_function(&b).unwrap();
        let s2 = sweep(&b);
        for (x, y) in s.values().iter().zip(s2.values()) {
            assert!((x * x - y).norm() <= 1e-8 * (1.0 + y.norm()));
        }
        // trace-integral of the sweep is sum_k ||d_k b||^2
        let dec = haar_decompose(&b);
        let parseval: f64 = dec.layers.iter().flat_map(|l| l.coefficients().iter().map(|c| c.norm_squared() / (1usize << (l.level() - 1)) as f64)).sum();
        let integral: f64 = s2.values().iter().map(|v| v.trace().re).sum::<f64>() / s2.len() as f64;
        assert!((parseval - integral).abs() < 1e-10 * parseval);
    }

    #[test]
    fn regularity_child_indicator() {
        let depth = 3;
        let a = MatrixStepFunction::from_fn(2, depth, |j| {
            if j < 2 { CMatrix::identity(2, 2) } else { CMatrix::zeros(2, 2) }
        });
        assert!((regularity_ratio(&a, 2).unwrap() - 2.0).abs() < 1e-14);
        assert!(matches!(regularity_ratio(&a, 1), Err(Error::NotMeasurable { .. })));
        assert!(regularity_ratio(&a, 0).is_err());
    }
}
