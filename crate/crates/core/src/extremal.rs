//! Contractive symbols with large paraproduct norm.
//!
//! For unit `alpha, beta` put `f = D alpha`, `g = D beta` with the Rademacher
//! diagonal `D = sum_i r_i e_i (x) e_i`. Then
//! `sum_k E_{k-1} f (x) d_k g = D T(alpha (x) beta) D`, where `T` keeps the
//! strictly upper triangular part, and the symbol `b = D V D` with `V` the
//! dual unitary of `T(alpha (x) beta)` pairs with `(f, g)` to
//! `||T(alpha (x) beta)||_{S^1}`. Since `||b||_inf = 1` and the pairing is
//! `<pi_b f, g>`, this is a lower bound for `||pi_b||` that grows like
//! `log(n + 1)`.

use nalgebra::DVector;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{
    haar_decompose, haar_sign, CMatrix, HaarDecomposition, MatrixStepFunction, VectorStepFunction,
};
use crate::error::{Error, Result};
use crate::paraproduct::{paraproduct_apply, paraproduct_l2_norm};
use crate::sampling::{real_gaussian_vector, rng, unit_vector};
use crate::spectral::{dual_unitary, schatten_norm, NormEstimate, NormMethod, PowerOptions};
use crate::symbol::{bmo_c_norm, linf_norm, sweep};

pub type CVector = DVector<Complex64>;

/// Largest `n` for experiments that materialize depth-`n` step functions.
pub const DEFAULT_POWER_BUDGET: usize = 16;

/// `D(t) = diag(r_1(t), ..., r_n(t))` as a depth-`n` step function.
pub fn rademacher_diagonal(n: usize) -> Result<MatrixStepFunction> {
    if n == 0 || n > 24 {
        return Err(Error::InvalidArgument(format!("rademacher_diagonal needs 1 <= n <= 24, got {n}")));
    }
    Ok(MatrixStepFunction::from_fn(n, n, |j| {
        CMatrix::from_diagonal(&CVector::from_iterator(
            n,
            (1..=n).map(|i| Complex64::new(haar_sign(j, n, i), 0.0)),
        ))
    }))
}

/// Strictly upper triangular part (`row < column`).
pub fn triangle_projection(a: &CMatrix) -> CMatrix {
    let mut out = a.clone();
    for i in 0..a.nrows() {
        for j in 0..a.ncols().min(i + 1) {
            out[(i, j)] = Complex64::new(0.0, 0.0);
        }
    }
    out
}

/// `x (x) y = x y^*`.
pub fn outer(x: &CVector, y: &CVector) -> CMatrix {
    x * y.adjoint()
}

/// Pointwise `D(t) v`.
pub fn apply_diagonal(d: &MatrixStepFunction, v: &CVector) -> Result<VectorStepFunction> {
    if v.len() != d.n() {
        return Err(Error::ShapeMismatch(format!("vector of length {} for n = {}", v.len(), d.n())));
    }
    let col = CMatrix::from_column_slice(v.len(), 1, v.as_slice());
    VectorStepFunction::new(d.n(), d.depth(), d.values().iter().map(|m| m * &col).collect())
}

/// `sum_k (E_{k-1} f) (x) (d_k g)` for vector-valued `f`, `g`.
pub fn martingale_outer_sum(f: &VectorStepFunction, g: &VectorStepFunction) -> Result<MatrixStepFunction> {
    f.same_shape(g)?;
    let df = haar_decompose(f);
    let dg = haar_decompose(g);
    let layers: Vec<Vec<CMatrix>> = dg
        .layers
        .iter()
        .enumerate()
        .map(|(l, layer)| {
            layer.coefficients().iter().zip(&df.means[l]).map(|(h, m)| m * h.adjoint()).collect()
        })
        .collect();
    let n = f.n();
    Ok(HaarDecomposition::synthesize(n, f.depth(), &CMatrix::zeros(n, n), &layers))
}

/// `L^1(S^1)` distance between `sum_k E_{k-1} f (x) d_k g` and `D T(alpha (x) beta) D`.
pub fn tensor_identity_check(alpha: &CVector, beta: &CVector) -> Result<f64> {
    let n = alpha.len();
    let d = rademacher_diagonal(n)?;
    let f = apply_diagonal(&d, alpha)?;
    let g = apply_diagonal(&d, beta)?;
    let lhs = martingale_outer_sum(&f, &g)?;
    let t = triangle_projection(&outer(alpha, beta));
    let mut acc = 0.0;
    for (l, dv) in lhs.values().iter().zip(d.values()) {
        acc += schatten_norm(&(l - dv * &t * dv), 1.0)?;
    }
    Ok(acc / lhs.len() as f64)
}

/// `tr int sum_k d_k b (E_{k-1} f (x) d_k g) dt`, which equals `<pi_b f, g>`.
pub fn paraproduct_pairing(b: &MatrixStepFunction, f: &VectorStepFunction, g: &VectorStepFunction) -> Result<Complex64> {
    b.same_shape(f)?;
    f.same_shape(g)?;
    let db = haar_decompose(b);
    let df = haar_decompose(f);
    let dg = haar_decompose(g);
    let mut total = Complex64::new(0.0, 0.0);
    for k in 1..=b.depth() {
        let weight = (-((k - 1) as f64)).exp2();
        for ((c, m), h) in db.layer(k).coefficients().iter().zip(&df.means[k - 1]).zip(dg.layer(k).coefficients()) {
            total += (c * m * h.adjoint()).trace() * weight;
        }
    }
    Ok(total)
}

/// The contractive symbol `b = D V D` with its test functions `f = D alpha`, `g = D beta`.
#[derive(Clone, Debug)]
pub struct WitnessBundle {
    pub n: usize,
    pub alpha: CVector,
    pub beta: CVector,
    pub d: MatrixStepFunction,
    /// `T(alpha (x) beta)`.
    pub m: CMatrix,
    /// Dual unitary of `m`.
    pub v: CMatrix,
    pub b: MatrixStepFunction,
    pub f: VectorStepFunction,
    pub g: VectorStepFunction,
    pub pairing_value: f64,
    /// Inputs that had to be renormalized.
    pub warnings: Vec<String>,
}

fn normalized(name: &str, v: &CVector, warnings: &mut Vec<String>) -> Result<CVector> {
    let norm = v.norm();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} must be a nonzero finite vector")));
    }
    if (norm - 1.0).abs() > 1e-12 {
        warnings.push(format!("{name} had norm {norm}; normalized"));
        return Ok(v / Complex64::new(norm, 0.0));
    }
    Ok(v.clone())
}

pub fn build_witness(alpha: &CVector, beta: &CVector) -> Result<WitnessBundle> {
    let n = alpha.len();
    if beta.len() != n {
        return Err(Error::ShapeMismatch("alpha and beta differ in length".into()));
    }
    let mut warnings = Vec::new();
    let alpha = normalized("alpha", alpha, &mut warnings)?;
    let beta = normalized("beta", beta, &mut warnings)?;
    let d = rademacher_diagonal(n)?;
    let m = triangle_projection(&outer(&alpha, &beta));
    let v = dual_unitary(&m)?;
    let b = d.map(|dv| dv * &v * dv);
    let f = apply_diagonal(&d, &alpha)?;
    let g = apply_diagonal(&d, &beta)?;
    let pairing_value = paraproduct_pairing(&b, &f, &g)?.re;
    Ok(WitnessBundle { n, alpha, beta, d, m, v, b, f, g, pairing_value, warnings })
}

pub fn uniform_unit(n: usize) -> CVector {
    CVector::from_element(n, Complex64::new(1.0 / (n as f64).sqrt(), 0.0))
}

/// The default witness with `alpha = beta = ones / sqrt(n)`.
pub fn uniform_witness(n: usize) -> Result<WitnessBundle> {
    build_witness(&uniform_unit(n), &uniform_unit(n))
}

/// `||T(alpha (x) beta)||_{S^1}`.
pub fn triangle_s1(alpha: &CVector, beta: &CVector) -> Result<f64> {
    schatten_norm(&triangle_projection(&outer(alpha, beta)), 1.0)
}

#[derive(Clone, Debug)]
pub struct TriangleSearch {
    pub estimate: NormEstimate,
    pub alpha: CVector,
    pub beta: CVector,
}

/// Alternating maximization of `Re tr(V T(alpha beta^*))` over the dual
/// unitary `V` and the unit vectors; every step is a block maximizer, so
/// `||T(alpha (x) beta)||_{S^1}` never decreases.
fn triangle_ascent(mut alpha: CVector, mut beta: CVector, iterations: usize) -> Result<(f64, CVector, CVector, usize)> {
    let mut value = triangle_s1(&alpha, &beta)?;
    let mut used = 0;
    for _ in 0..iterations {
        used += 1;
        let y = triangle_projection(&dual_unitary(&triangle_projection(&outer(&alpha, &beta)))?.adjoint());
        let a = &y * &beta;
        if a.norm() == 0.0 {
            break;
        }
        let a = &a / Complex64::new(a.norm(), 0.0);
        let bb = y.adjoint() * &a;
        if bb.norm() == 0.0 {
            break;
        }
        let bb = &bb / Complex64::new(bb.norm(), 0.0);
        let next = triangle_s1(&a, &bb)?;
        if next <= value * (1.0 + 1e-13) {
            if next > value {
                alpha = a;
                beta = bb;
                value = next;
            }
            break;
        }
        alpha = a;
        beta = bb;
        value = next;
    }
    Ok((value, alpha, beta, used))
}

fn pad(v: &CVector, n: usize) -> CVector {
    CVector::from_iterator(n, (0..n).map(|i| if i < v.len() { v[i] } else { Complex64::new(0.0, 0.0) }))
}

/// Multi-start lower bound for `||T||_{S^1 -> S^1}` over rank-one inputs.
///
/// A warm start from a smaller `n` is zero-padded; its value carries over
/// unchanged, which makes consecutive searches nondecreasing in `n`.
pub fn triangle_s1_search(n: usize, starts: usize, seed: u64, warm: Option<(&CVector, &CVector)>) -> Result<TriangleSearch> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    let mut g = rng(seed);
    let mut initial = Vec::new();
    if let Some((a, b)) = warm {
        if a.len() <= n && b.len() == a.len() {
            initial.push((pad(a, n), pad(b, n)));
        }
    }
    initial.push((uniform_unit(n), uniform_unit(n)));
    let mut e1 = CVector::zeros(n);
    e1[0] = Complex64::new(1.0, 0.0);
    let mut en = CVector::zeros(n);
    en[n - 1] = Complex64::new(1.0, 0.0);
    initial.push((e1, en));
    for i in 0..starts.max(1) {
        let pair = if i % 2 == 0 {
            let a = real_gaussian_vector(&mut g, n);
            let b = real_gaussian_vector(&mut g, n);
            let (na, nb) = (a.norm(), b.norm());
            (a / Complex64::new(na, 0.0), b / Complex64::new(nb, 0.0))
        } else {
            (unit_vector(&mut g, n), unit_vector(&mut g, n))
        };
        initial.push(pair);
    }
    let runs: Vec<(f64, CVector, CVector, usize)> = initial
        .into_par_iter()
        .map(|(a, b)| triangle_ascent(a, b, 500))
        .collect::<Result<_>>()?;
    let iterations = runs.iter().map(|r| r.3).sum();
    let mut best = &runs[0];
    for r in &runs[1..] {
        if r.0 > best.0 {
            best = r;
        }
    }
    // value recomputed at the stored witness
    let value = triangle_s1(&best.1, &best.2)?;
    Ok(TriangleSearch {
        estimate: NormEstimate::lower_bound(value, NormMethod::AscentLowerBound, iterations),
        alpha: best.1.clone(),
        beta: best.2.clone(),
    })
}

pub fn triangle_s1_lower_bound(n: usize, starts: usize, seed: u64) -> Result<NormEstimate> {
    Ok(triangle_s1_search(n, starts, seed, None)?.estimate)
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleRow {
    pub n: usize,
    pub lower_bound: f64,
    pub ratio_to_log: f64,
    /// Value at `alpha = beta = ones / sqrt(n)`.
    pub uniform: f64,
}

/// Searches over increasing `n`, warm-starting each size from the previous
/// witness. Rows are ordered by `n`.
pub fn triangle_growth(n_list: &[usize], starts: usize, seed: u64) -> Result<Vec<TriangleRow>> {
    let mut sorted = n_list.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut rows = Vec::with_capacity(sorted.len());
    let mut warm: Option<(CVector, CVector)> = None;
    for (i, &n) in sorted.iter().enumerate() {
        let search = triangle_s1_search(n, starts, seed.wrapping_add(i as u64), warm.as_ref().map(|(a, b)| (a, b)))?;
        let u = uniform_unit(n);
        let value = search.estimate.value;
        rows.push(TriangleRow { n, lower_bound: value, ratio_to_log: value / ((n + 1) as f64).ln(), uniform: triangle_s1(&u, &u)? });
        warm = Some((search.alpha, search.beta));
    }
    Ok(rows)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthMode {
    Pairing,
    Power,
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthRow {
    pub n: usize,
    pub lower_bound: f64,
    pub ratio_to_log: f64,
    pub method: NormMethod,
    /// `||T(alpha (x) beta)||_{S^1}` for the same `alpha, beta`.
    pub pairing: f64,
    /// `||b||_inf` of the witness, when it was materialized.
    pub linf: Option<f64>,
}

fn check_budget(n: usize, budget: usize) -> Result<()> {
    if n > budget {
        return Err(Error::Budget(format!("n = {n} exceeds the depth-n budget {budget}")));
    }
    Ok(())
}

/// Growth of the lower bound `L(n)` for `||pi_b||` with `||b||_inf <= 1`.
///
/// Pairing mode evaluates `||T(alpha (x) beta)||_{S^1}` with `alpha = beta =
/// ones / sqrt(n)` (one `n x n` SVD); power mode materializes the witness and
/// runs power iteration on `pi_b`.
pub fn theorem11_experiment(n_list: &[usize], mode: GrowthMode, seed: u64, budget: usize) -> Result<Vec<GrowthRow>> {
    if mode == GrowthMode::Power {
        for &n in n_list {
            check_budget(n, budget)?;
        }
    }
    n_list
        .par_iter()
        .enumerate()
        .map(|(i, &n)| {
            if n == 0 {
                return Err(Error::InvalidArgument("n must be positive".into()));
            }
            let u = uniform_unit(n);
            let pairing = triangle_s1(&u, &u)?;
            let (lower_bound, method, linf) = match mode {
                GrowthMode::Pairing => (pairing, NormMethod::PairingLowerBound, None),
                GrowthMode::Power => {
                    let w = uniform_witness(n)?;
                    let est = paraproduct_l2_norm(&w.b, &PowerOptions::with_seed(seed.wrapping_add(i as u64)))?;
                    (est.value, NormMethod::PowerIteration, Some(linf_norm(&w.b)?))
                }
            };
            Ok(GrowthRow { n, lower_bound, ratio_to_log: lower_bound / ((n + 1) as f64).ln(), method, pairing, linf })
        })
        .collect()
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    pub value: f64,
    pub ratio_to_log: f64,
}

/// `||S^2(b_n)||_{BMO_c}` for the uniform witnesses `b_n`.
pub fn sweep_experiment(n_list: &[usize], budget: usize) -> Result<Vec<SweepRow>> {
    for &n in n_list {
        check_budget(n, budget)?;
    }
    n_list
        .par_iter()
        .map(|&n| {
            let w = uniform_witness(n)?;
            let value = bmo_c_norm(&sweep(&w.b))?;
            Ok(SweepRow { n, value, ratio_to_log: value / ((n + 1) as f64).ln() })
        })
        .collect()
}

/// Split of `||pi_b f||^2_{L^2(S^2)}` into the diagonal part `I` and the
/// martingale-difference part `II`, with `d_0 f = E_0 f`.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairingDecomposition {
    pub i_term: f64,
    pub ii_term: f64,
    pub total: f64,
    pub bmo_c: f64,
    pub f_norm_sq: f64,
}

impl PairingDecomposition {
    pub fn identity_defect(&self) -> f64 {
        (self.total - self.i_term - self.ii_term).abs() / self.total.abs().max(1e-300)
    }

    pub fn diagonal_bound_holds(&self) -> bool {
        self.i_term <= self.bmo_c * self.bmo_c * self.f_norm_sq + 1e-8
    }
}

pub fn pairing_decomposition(b: &MatrixStepFunction, f: &MatrixStepFunction) -> Result<PairingDecomposition> {
    b.same_shape(f)?;
    let (n, depth) = (b.n(), b.depth());
    let size = b.len();
    let dec_b = haar_decompose(b);
    let dec_f = haar_decompose(f);
    let zero = CMatrix::zeros(n, n);

    // value of d_k at finest atom j, for k >= 1
    let diff_at = |dec: &HaarDecomposition<crate::dyadic::Square>, k: usize, j: usize| -> CMatrix {
        let a = j >> (depth - k + 1);
        dec.layer(k).coefficients()[a].clone() * Complex64::new(haar_sign(j, depth, k), 0.0)
    };
    let mean_at = |dec: &HaarDecomposition<crate::dyadic::Square>, k: usize, j: usize| -> CMatrix {
        dec.means[k][j >> (depth - k)].clone()
    };

    let mut i_term = 0.0;
    let mut ii_term = 0.0;
    for j in 0..size {
        // tails[i] = sum_{k > i} |d_k b|^2 at atom j
        let mut tails = vec![zero.clone(); depth + 1];
        for i in (0..depth).rev() {
            let d = diff_at(&dec_b, i + 1, j);
            tails[i] = &tails[i + 1] + d.adjoint() * d;
        }
        let m0 = &dec_f.mean;
        i_term += (&tails[0] * m0 * m0.adjoint()).trace().re;
        for i in 1..=depth {
            let di = diff_at(&dec_f, i, j);
            let prev = mean_at(&dec_f, i - 1, j);
            i_term += (&tails[i] * &di * di.adjoint()).trace().re;
            ii_term += (&tails[i] * (&prev * di.adjoint() + &di * prev.adjoint())).trace().re;
        }
    }
    i_term /= size as f64;
    ii_term /= size as f64;
    let pf = paraproduct_apply(b, f)?;
    let total = crate::dyadic::l2_inner(&pf, &pf)?.re;
    let f_norm_sq = crate::dyadic::l2_inner(f, f)?.re;
    Ok(PairingDecomposition { i_term, ii_term, total, bmo_c: bmo_c_norm(b)?, f_norm_sq })
}

/// Decomposition for the uniform witness of size `n` and a random unit `f`.
pub fn pairing_decomposition_check(n: usize, seed: u64) -> Result<PairingDecomposition> {
    let w = uniform_witness(n)?;
    let mut g = rng(seed);
    let f: MatrixStepFunction = crate::sampling::gaussian_step(&mut g, n, n);
    let norm = f.l2_norm();
    pairing_decomposition(&w.b, &f.scale(Complex64::new(1.0 / norm, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::l2_inner;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn cv(v: &[f64]) -> CVector {
        CVector::from_iterator(v.len(), v.iter().map(|&x| c(x)))
    }

    #[test]
    fn diagonal_basics() {
        let d1 = rademacher_diagonal(1).unwrap();
        let r1 = crate::dyadic::rademacher(1, 1).unwrap();
        assert_eq!(d1.values().iter().map(|v| v[(0, 0)]).collect::<Vec<_>>(), r1.scalars().unwrap());
        for n in 1..=5 {
            let d = rademacher_diagonal(n).unwrap();
            assert_eq!(linf_norm(&d).unwrap(), 1.0);
            for v in d.values() {
                assert_eq!(v * v, CMatrix::identity(n, n));
            }
        }
        assert!(rademacher_diagonal(0).is_err());
    }

    #[test]
    fn diagonal_is_isometric() {
        let mut g = rng(1);
        for n in 1..=6 {
            let a = unit_vector(&mut g, n) * c(2.5);
            let f = apply_diagonal(&rademacher_diagonal(n).unwrap(), &a).unwrap();
            assert!((f.l2_norm() - a.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn triangle_cases() {
        let ones = CMatrix::from_element(2, 2, c(1.0));
        let t = triangle_projection(&ones);
        assert_eq!(t, CMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(0.), c(0.)]));
        assert_eq!(triangle_projection(&CMatrix::identity(1, 1)), CMatrix::zeros(1, 1));
        let mut g = rng(2);
        let a = crate::sampling::gaussian_matrix(&mut g, 4, 4);
        assert_eq!(triangle_projection(&triangle_projection(&a)), triangle_projection(&a));
    }

    #[test]
    fn tensor_identity_small() {
        assert_eq!(tensor_identity_check(&cv(&[1.0]), &cv(&[1.0])).unwrap(), 0.0);
        let h = 0.5f64.sqrt();
        assert!(tensor_identity_check(&cv(&[h, h]), &cv(&[h, h])).unwrap() <= 1e-12);
        let mut g = rng(3);
        let a = unit_vector(&mut g, 4);
        let b = unit_vector(&mut g, 4);
        assert!(tensor_identity_check(&a, &b).unwrap() <= 1e-10);
    }

    #[test]
    fn witness_examples() {
        let w = build_witness(&cv(&[1.0, 0.0]), &cv(&[0.0, 1.0])).unwrap();
        assert!((w.pairing_value - 1.0).abs() < 1e-12);
        let h = 0.5f64.sqrt();
        let w = build_witness(&cv(&[h, h]), &cv(&[h, h])).unwrap();
        assert!((w.pairing_value - 0.5).abs() < 1e-12);
        assert!(w.warnings.is_empty());

        let w = uniform_witness(4).unwrap();
        let expect = schatten_norm(&(triangle_projection(&CMatrix::from_element(4, 4, c(1.0))) * c(0.25)), 1.0).unwrap();
        assert!((w.pairing_value - expect).abs() < 1e-8);
        assert!(linf_norm(&w.b).unwrap() <= 1.0 + 1e-10);
        assert!((w.f.l2_norm() - 1.0).abs() < 1e-12);
        assert!((w.g.l2_norm() - 1.0).abs() < 1e-12);
        // the pairing is <pi_b f, g>
        let direct = l2_inner(&paraproduct_apply(&w.b, &w.f).unwrap(), &w.g).unwrap();
        assert!((direct.re - w.pairing_value).abs() < 1e-12);
    }

    #[test]
    fn witness_normalizes_inputs() {
        let w = build_witness(&cv(&[2.0, 0.0]), &cv(&[0.0, 1.0])).unwrap();
        assert_eq!(w.warnings.len(), 1);
        assert!((w.pairing_value - 1.0).abs() < 1e-12);
        assert!(build_witness(&cv(&[0.0, 0.0]), &cv(&[0.0, 1.0])).is_err());
    }

    #[test]
    fn triangle_search_small() {
        assert_eq!(triangle_s1_lower_bound(1, 4, 1).unwrap().value, 0.0);
        assert!((triangle_s1_lower_bound(2, 4, 1).unwrap().value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn triangle_search_beats_grid_at_three() {
        let mut grid = 0.0f64;
        let steps = (2.0 * std::f64::consts::PI / 0.05).ceil() as usize;
        for i in 0..steps {
            let t = i as f64 * 0.05;
            for j in 0..steps {
                let p = j as f64 * 0.05;
                let a = cv(&[t.cos(), t.sin(), 0.0]);
                let b = cv(&[0.0, p.cos(), p.sin()]);
                grid = grid.max(triangle_s1(&a, &b).unwrap());
            }
        }
        let u = uniform_unit(3);
        let found = triangle_s1_lower_bound(3, 8, 11).unwrap().value;
        assert!(found >= grid - 1e-9, "{found} < {grid}");
        assert!(found >= triangle_s1(&u, &u).unwrap());
        assert!(found >= 1.0);
    }

    #[test]
    fn triangle_growth_is_monotone() {
        let rows = triangle_growth(&[8, 2, 4, 3, 6], 4, 3).unwrap();
        assert_eq!(rows.iter().map(|r| r.n).collect::<Vec<_>>(), vec![2, 3, 4, 6, 8]);
        for w in rows.windows(2) {
            assert!(w[1].lower_bound >= w[0].lower_bound - 1e-12);
        }
        for r in &rows {
            assert!(r.lower_bound >= r.uniform - 1e-12);
        }
    }

    #[test]
    fn degenerate_sweep_has_no_oscillation() {
        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.5), c(-1.0)]);
        let b = MatrixStepFunction::scalar_times(&crate::dyadic::rademacher(1, 3).unwrap(), &a).unwrap();
        assert!(bmo_c_norm(&sweep(&b)).unwrap() < 1e-12);
    }

    #[test]
    fn growth_small() {
        let rows = theorem11_experiment(&[2], GrowthMode::Pairing, 1, DEFAULT_POWER_BUDGET).unwrap();
        assert!((rows[0].lower_bound - 0.5).abs() < 1e-12);
        let rows = theorem11_experiment(&[2], GrowthMode::Power, 1, DEFAULT_POWER_BUDGET).unwrap();
        assert!(rows[0].lower_bound >= 0.5 - 1e-6);
        assert!(matches!(theorem11_experiment(&[17], GrowthMode::Power, 1, 16), Err(Error::Budget(_))));
        assert!(matches!(sweep_experiment(&[17], 16), Err(Error::Budget(_))));
    }

    #[test]
    fn pairing_decomposition_cases() {
        let b = MatrixStepFunction::constant(2, 3, CMatrix::identity(2, 2));
        let mut g = rng(4);
        let f: MatrixStepFunction = crate::sampling::gaussian_step(&mut g, 2, 3);
        let p = pairing_decomposition(&b, &f).unwrap();
        assert_eq!((p.i_term, p.ii_term, p.total), (0.0, 0.0, 0.0));

        let a = CMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(-1.0)]);
        let b = MatrixStepFunction::scalar_times(&crate::dyadic::rademacher(1, 3).unwrap(), &a).unwrap();
        let p = pairing_decomposition(&b, &f).unwrap();
        assert_eq!(p.ii_term, 0.0);
        assert!((p.total - p.i_term).abs() < 1e-12 * p.total);

        let p = pairing_decomposition_check(3, 5).unwrap();
        assert!(p.identity_defect() < 1e-9);
        assert!(p.diagonal_bound_holds());
    }
}
