//! Dense reference assemblies built directly from atom averages, without the
//! Haar routines of the library.
#![allow(dead_code)]

use paralab::dyadic::{CMatrix, MatrixStepFunction, StepFunction, ValueKind};
use paralab::Complex64;

/// Flat index of entry `(row, col)` at finest atom `j`.
pub fn idx(n: usize, cols: usize, j: usize, row: usize, col: usize) -> usize {
    j * n * cols + col * n + row
}

pub fn flatten<K: ValueKind>(f: &StepFunction<K>) -> Vec<Complex64> {
    let (n, c) = (f.n(), f.cols());
    let mut out = vec![Complex64::new(0.0, 0.0); f.len() * n * c];
    for j in 0..f.len() {
        for col in 0..c {
            for row in 0..n {
                out[idx(n, c, j, row, col)] = f.value(j)[(row, col)];
            }
        }
    }
    out
}

/// Dense `E_k` on functions with `n x cols` values.
pub fn dense_expectation(n: usize, cols: usize, depth: usize, k: usize) -> CMatrix {
    let atoms = 1usize << depth;
    let block = 1usize << (depth - k);
    let dim = atoms * n * cols;
    let mut e = CMatrix::zeros(dim, dim);
    let w = Complex64::new(1.0 / block as f64, 0.0);
    for j in 0..atoms {
        let start = (j / block) * block;
        for jj in start..start + block {
            for col in 0..cols {
                for row in 0..n {
                    e[(idx(n, cols, j, row, col), idx(n, cols, jj, row, col))] += w;
                }
            }
        }
    }
    e
}

/// Dense pointwise `F -> B F` (left) or `F -> F B` (right, square values only).
pub fn dense_multiplication(b: &[CMatrix], n: usize, cols: usize, left: bool) -> CMatrix {
    let dim = b.len() * n * cols;
    let mut m = CMatrix::zeros(dim, dim);
    for (j, bj) in b.iter().enumerate() {
        for col in 0..cols {
            for row in 0..n {
                let out = idx(n, cols, j, row, col);
                for s in 0..n {
                    if left {
                        // (B F)[row, col] = sum_s B[row, s] F[s, col]
                        m[(out, idx(n, cols, j, s, col))] += bj[(row, s)];
                    } else {
                        // (F B)[row, col] = sum_s F[row, s] B[s, col]
                        m[(out, idx(n, cols, j, row, s))] += bj[(s, col)];
                    }
                }
            }
        }
    }
    m
}

/// Pointwise values of `d_k b = E_k b - E_{k-1} b`, via the dense expectations.
pub fn dense_difference(b: &MatrixStepFunction, k: usize) -> Vec<CMatrix> {
    let (n, depth) = (b.n(), b.depth());
    let flat = nalgebra::DVector::from_vec(flatten(b));
    let d = (dense_expectation(n, n, depth, k) - dense_expectation(n, n, depth, k - 1)) * flat;
    (0..b.len())
        .map(|j| CMatrix::from_fn(n, n, |r, c| d[idx(n, n, j, r, c)]))
        .collect()
}

/// Dense `pi_b` (left) or `tilde_pi_b` (right) on `n x cols` valued functions.
pub fn dense_paraproduct(b: &MatrixStepFunction, cols: usize, left: bool) -> CMatrix {
    let (n, depth) = (b.n(), b.depth());
    let dim = b.len() * n * cols;
    let mut p = CMatrix::zeros(dim, dim);
    for k in 1..=depth {
        p += dense_multiplication(&dense_difference(b, k), n, cols, left) * dense_expectation(n, cols, depth, k - 1);
    }
    p
}

/// Dense tail multiplier `a -> (b - E_{m'-1} b) a` restricted to `F_m`-measurable `a`.
pub fn dense_multiplier(b: &MatrixStepFunction, m: usize, left: bool) -> CMatrix {
    let (n, depth) = (b.n(), b.depth());
    let first = m.max(1);
    let flat = nalgebra::DVector::from_vec(flatten(b));
    let dim = b.len() * n * n;
    if first > depth {
        return CMatrix::zeros(dim, dim);
    }
    let tail = (CMatrix::identity(dim, dim) - dense_expectation(n, n, depth, first - 1)) * flat;
    let vals: Vec<CMatrix> = (0..b.len()).map(|j| CMatrix::from_fn(n, n, |r, c| tail[idx(n, n, j, r, c)])).collect();
    dense_multiplication(&vals, n, n, left) * dense_expectation(n, n, depth, m)
}

/// Largest singular value from the Hermitian eigenproblem of `A^* A`.
pub fn top_singular_value(a: &CMatrix) -> f64 {
    let h = a.adjoint() * a;
    let h = (&h + h.adjoint()) * Complex64::new(0.5, 0.0);
    h.symmetric_eigen().eigenvalues.iter().copied().fold(0.0, f64::max).max(0.0).sqrt()
}

pub fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
