//! Spectral kernels built on one SVD routine, and a power-iteration
//! operator-norm estimator for matrix-free linear maps.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{flat_inner, CMatrix};
use crate::error::{Error, Result};

/// Thin SVD `A = U diag(s) V*` with `s` descending.
///
/// The first non-negligible entry of every left singular vector is real
/// positive, which fixes the phases of `U` and `V` deterministically.
#[derive(Clone, Debug)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

pub fn svd(a: &CMatrix) -> Result<Svd> {
    if a.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    let (rows, cols) = a.shape();
    let r = rows.min(cols);
    if r == 0 {
        return Ok(Svd { u: CMatrix::zeros(rows, 0), s: Vec::new(), v: CMatrix::zeros(cols, 0) });
    }
    let (u_raw, sv, v_raw) = match backend_svd(a) {
        Some(f) => f,
        None => jacobi_svd(a).ok_or(Error::SvdFailure)?,
    };
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&i, &j| sv[j].total_cmp(&sv[i]).then(i.cmp(&j)));

    let mut u = CMatrix::zeros(rows, r);
    let mut v = CMatrix::zeros(cols, r);
    let mut s = Vec::with_capacity(r);
    for (dst, &src) in order.iter().enumerate() {
        let mut uc = u_raw.column(src).clone_owned();
        let mut vc = v_raw.column(src).clone_owned();
        let scale = uc.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if let Some(lead) = uc.iter().copied().find(|z| z.norm() > 1e-8 * scale) {
            let phase = lead.conj() / lead.norm();
            uc *= phase;
            vc *= phase;
        }
        u.set_column(dst, &uc);
        v.set_column(dst, &vc);
        s.push(sv[src].max(0.0));
    }
    Ok(Svd { u, s, v })
}

type RawSvd = (CMatrix, Vec<f64>, CMatrix);

fn reconstruction_ok(a: &CMatrix, u: &CMatrix, s: &[f64], v: &CMatrix) -> bool {
    let sigma = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(s.len(), s.iter().map(|&x| Complex64::new(x, 0.0))));
    (u * sigma * v.adjoint() - a).norm() <= 1e-12 * a.norm()
}

/// nalgebra's SVD, accepted only if it reconstructs `a` to `1e-12` relative.
///
/// The backend can return inaccurate factorizations without reporting
/// failure (tight thresholds, nearly singular inputs), hence the check.
fn backend_svd(a: &CMatrix) -> Option<RawSvd> {
    let raw = a.clone().try_svd(true, true, 5.0 * f64::EPSILON, 0)?;
    let u = raw.u?;
    let v = raw.v_t?.adjoint();
    let s: Vec<f64> = raw.singular_values.iter().copied().collect();
    reconstruction_ok(a, &u, &s, &v).then_some((u, s, v))
}

/// One-sided Jacobi SVD, the fallback when the backend is inaccurate.
fn jacobi_svd(a: &CMatrix) -> Option<RawSvd> {
    let (rows, cols) = a.shape();
    if rows < cols {
        let (u, s, v) = jacobi_svd(&a.adjoint())?;
        return Some((v, s, u));
    }
    let mut w = a.clone();
    let mut v = CMatrix::identity(cols, cols);
    let tol = 4.0 * f64::EPSILON;
    let mut converged = false;
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g <= tol * (alpha * beta).sqrt() || g == 0.0 {
                    continue;
                }
                rotated = true;
                // rotate column q by the phase of gamma, then a real rotation
                let phase = gamma.conj() / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = c * t;
                for mat in [&mut w, &mut v] {
                    for i in 0..mat.nrows() {
                        let xp = mat[(i, p)];
                        let xq = mat[(i, q)] * phase;
                        mat[(i, p)] = xp * c - xq * sn;
                        mat[(i, q)] = xp * sn + xq * c;
                    }
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return None;
    }
    let s: Vec<f64> = (0..cols).map(|j| w.column(j).norm()).collect();
    let smax = s.iter().copied().fold(0.0, f64::max);
    let mut u = CMatrix::zeros(rows, cols);
    let mut filled = Vec::new();
    for j in 0..cols {
        if s[j] > 1e-300 && s[j] > f64::EPSILON * smax * 1e-4 {
            u.set_column(j, &(w.column(j) / Complex64::new(s[j], 0.0)));
            filled.push(j);
        }
    }
    // orthonormal completion for null columns
    let mut basis = 0;
    for j in 0..cols {
        if filled.contains(&j) {
            continue;
        }
        loop {
            let mut e = nalgebra::DVector::<Complex64>::zeros(rows);
            e[basis % rows] = Complex64::new(1.0, 0.0);
            basis += 1;
            for &k in &filled {
                let proj = u.column(k).dotc(&e);
                e -= u.column(k) * proj;
            }
            let n = e.norm();
            if n > 1e-6 {
                u.set_column(j, &(e / Complex64::new(n, 0.0)));
                filled.push(j);
                break;
            }
            if basis > 2 * rows {
                return None;
            }
        }
    }
    reconstruction_ok(a, &u, &s, &v).then_some((u, s, v))
}

pub fn singular_values(a: &CMatrix) -> Result<Vec<f64>> {
    Ok(svd(a)?.s)
}

pub fn spectral_norm(a: &CMatrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

fn lp_of(s: &[f64], p: f64) -> f64 {
    let top = s.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return top;
    }
    top * s.iter().map(|x| (x / top).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// `(sum s_i^p)^(1/p)`; `p = f64::INFINITY` gives the spectral norm.
pub fn schatten_norm(a: &CMatrix, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::ExponentOutOfRange(p));
    }
    Ok(lp_of(&singular_values(a)?, p))
}

fn hermitian_defect(a: &CMatrix) -> f64 {
    (a - a.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Square root of a Hermitian positive semidefinite matrix.
///
/// Eigenvalues down to `-1e-10` (relative to `max(1, ||A||)`) are clamped to zero.
pub fn psd_sqrt(a: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::ShapeMismatch(format!("psd_sqrt of {}x{}", n, a.ncols())));
    }
    let dec = svd(a)?;
    let scale = dec.s.first().copied().unwrap_or(0.0).max(1.0);
    let defect = hermitian_defect(a);
    if defect > 1e-10 * scale {
        return Err(Error::NotHermitian(defect));
    }
    let mut out = CMatrix::zeros(n, n);
    for (i, &s) in dec.s.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let v = dec.v.column(i);
        let lambda = (v.adjoint() * a * v)[(0, 0)].re;
        if lambda < -1e-10 * scale {
            return Err(Error::NotPsd(lambda));
        }
        if lambda > 0.0 {
            out += (&v * v.adjoint()) * Complex64::new(lambda.sqrt(), 0.0);
        }
    }
    Ok((&out + out.adjoint()) * Complex64::new(0.5, 0.0))
}

/// `|A| = (A* A)^(1/2)` through the SVD.
pub fn abs_matrix(a: &CMatrix) -> Result<CMatrix> {
    let dec = svd(a)?;
    let n = a.ncols();
    let mut out = CMatrix::zeros(n, n);
    for (i, &s) in dec.s.iter().enumerate() {
        let v = dec.v.column(i);
        out += (&v * v.adjoint()) * Complex64::new(s, 0.0);
    }
    Ok(out)
}

/// Unitary `V = W U*` for `M = U S W*`, so that `tr(V M) = ||M||_{S^1}`.
pub fn dual_unitary(m: &CMatrix) -> Result<CMatrix> {
    if m.nrows() != m.ncols() {
        return Err(Error::ShapeMismatch("dual_unitary needs a square matrix".into()));
    }
    let dec = svd(m)?;
    Ok(&dec.v * dec.u.adjoint())
}

/// Largest eigenvalue and a unit eigenvector of a Hermitian PSD matrix.
pub fn top_eigenpair(a: &CMatrix) -> Result<(f64, nalgebra::DVector<Complex64>)> {
    let dec = svd(a)?;
    Ok((dec.s[0], dec.v.column(0).clone_owned()))
}

/// Clamps every singular value at `1`.
pub fn clip_to_unit_ball(a: &CMatrix) -> Result<CMatrix> {
    let dec = svd(a)?;
    if dec.s.first().is_none_or(|&s| s <= 1.0) {
        return Ok(a.clone());
    }
    let clipped = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dec.s.len(),
        dec.s.iter().map(|&s| Complex64::new(s.min(1.0), 0.0)),
    ));
    Ok(&dec.u * clipped * dec.v.adjoint())
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormMethod {
    ExactSvd,
    PowerIteration,
    AscentLowerBound,
    PairingLowerBound,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Certification {
    Exact,
    LowerBound,
    Heuristic,
}

/// A computed norm value together with how far it can be trusted.
///
/// `LowerBound` values are ratios achieved at a concrete input, so they never
/// exceed the true norm.
#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub value: f64,
    pub method: NormMethod,
    pub certification: Certification,
    pub iterations: usize,
    pub residual: f64,
}

impl NormEstimate {
    pub fn exact(value: f64, method: NormMethod) -> Self {
        Self { value, method, certification: Certification::Exact, iterations: 0, residual: 0.0 }
    }

    pub fn lower_bound(value: f64, method: NormMethod, iterations: usize) -> Self {
        Self { value, method, certification: Certification::LowerBound, iterations, residual: 0.0 }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceKind {
    Vector,
    Matrix,
}

/// Domain or codomain of a [`LinearOperator`].
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Shape {
    pub kind: SpaceKind,
    pub n: usize,
    pub depth: usize,
}

impl Shape {
    pub fn vector(n: usize, depth: usize) -> Self {
        Self { kind: SpaceKind::Vector, n, depth }
    }

    pub fn matrix(n: usize, depth: usize) -> Self {
        Self { kind: SpaceKind::Matrix, n, depth }
    }

    pub fn len(&self) -> usize {
        let per_atom = match self.kind {
            SpaceKind::Vector => self.n,
            SpaceKind::Matrix => self.n * self.n,
        };
        per_atom << self.depth
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Normalized `L^2` inner product on flattened step functions.
    pub fn inner(&self, x: &[Complex64], y: &[Complex64]) -> Complex64 {
        flat_inner(x, y) / (1u64 << self.depth) as f64
    }
}

/// Matrix-free linear map between flattened step-function spaces.
///
/// `adjoint_apply` realizes the adjoint for the normalized `L^2` inner
/// products of [`Shape::inner`]. Input and output share a depth, so this is
/// also the adjoint for the unweighted flat inner product.
pub trait LinearOperator: Send + Sync {
    fn input_shape(&self) -> Shape;
    fn output_shape(&self) -> Shape;
    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>>;
    fn adjoint_apply(&self, y: &[Complex64]) -> Result<Vec<Complex64>>;

    /// Projects a vector onto the operator's domain (identity unless the
    /// domain is a proper subspace).
    fn restrict_input(&self, _x: &mut [Complex64]) {}
}

/// Dense matrix as a [`LinearOperator`] on unweighted coordinates.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    pub matrix: CMatrix,
}

impl LinearOperator for DenseOperator {
    fn input_shape(&self) -> Shape {
        Shape::vector(self.matrix.ncols(), 0)
    }

    fn output_shape(&self) -> Shape {
        Shape::vector(self.matrix.nrows(), 0)
    }

    fn apply(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        if x.len() != self.matrix.ncols() {
            return Err(Error::ShapeMismatch("dense apply".into()));
        }
        Ok((&self.matrix * nalgebra::DVector::from_column_slice(x)).as_slice().to_vec())
    }

    fn adjoint_apply(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        if y.len() != self.matrix.nrows() {
            return Err(Error::ShapeMismatch("dense adjoint apply".into()));
        }
        Ok((self.matrix.adjoint() * nalgebra::DVector::from_column_slice(y)).as_slice().to_vec())
    }
}

/// Assembles the dense matrix of an operator column by column.
pub fn assemble_dense(op: &dyn LinearOperator) -> Result<CMatrix> {
    let n_in = op.input_shape().len();
    let n_out = op.output_shape().len();
    let mut out = CMatrix::zeros(n_out, n_in);
    let mut e = vec![Complex64::new(0.0, 0.0); n_in];
    for j in 0..n_in {
        e[j] = Complex64::new(1.0, 0.0);
        let col = op.apply(&e)?;
        for (i, z) in col.into_iter().enumerate() {
            out[(i, j)] = z;
        }
        e[j] = Complex64::new(0.0, 0.0);
    }
    Ok(out)
}

pub fn exact_operator_norm(matrix: &CMatrix) -> Result<NormEstimate> {
    Ok(NormEstimate::exact(spectral_norm(matrix)?, NormMethod::ExactSvd))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub starts: usize,
    pub seed: u64,
}

impl Default for PowerOptions {
    fn default() -> Self {
        Self { tol: 1e-9, max_iter: 5000, starts: 3, seed: 0 }
    }
}

impl PowerOptions {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

pub fn gaussian_flat(rng: &mut ChaCha8Rng, len: usize) -> Vec<Complex64> {
    (0..len)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im)
        })
        .collect()
}

fn flat_norm(x: &[Complex64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

struct PowerRun {
    lambda: f64,
    iterations: usize,
    residual: f64,
    converged: bool,
}

fn power_run(op: &dyn LinearOperator, opts: &PowerOptions, start: usize) -> Result<PowerRun> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(0x9e37_79b9_7f4a_7c15u64.wrapping_mul(start as u64 + 1)));
    let mut x = gaussian_flat(&mut rng, op.input_shape().len());
    op.restrict_input(&mut x);
    let norm = flat_norm(&x);
    if norm == 0.0 {
        return Ok(PowerRun { lambda: 0.0, iterations: 0, residual: 0.0, converged: true });
    }
    x.iter_mut().for_each(|z| *z /= norm);

    let mut lambda_prev = f64::NAN;
    let mut best = 0.0f64;
    let mut residual = f64::INFINITY;
    for it in 1..=opts.max_iter {
        let y = op.apply(&x)?;
        let lambda = y.iter().map(|z| z.norm_sqr()).sum::<f64>();
        best = best.max(lambda);
        if lambda == 0.0 {
            return Ok(PowerRun { lambda: best, iterations: it, residual: 0.0, converged: true });
        }
        let mut z = op.adjoint_apply(&y)?;
        op.restrict_input(&mut z);
        residual = z.iter().zip(&x).map(|(a, b)| (a - b * lambda).norm_sqr()).sum::<f64>().sqrt();
        let zn = flat_norm(&z);
        if (lambda - lambda_prev).abs() <= opts.tol * lambda {
            return Ok(PowerRun { lambda: best, iterations: it, residual, converged: true });
        }
        lambda_prev = lambda;
        x = z.into_iter().map(|v| v / zn).collect();
    }
    Ok(PowerRun { lambda: best, iterations: opts.max_iter, residual, converged: false })
}

/// Largest singular value of `op` by power iteration on `A* A`.
///
/// Runs `opts.starts` seeded starts and keeps the largest Rayleigh quotient.
/// The value is `||A x|| / ||x||` at a concrete `x`, hence a lower bound;
/// runs that exhaust `max_iter` are reported as heuristic.
pub fn operator_norm_power(op: &dyn LinearOperator, opts: &PowerOptions) -> Result<NormEstimate> {
    let runs: Vec<PowerRun> = (0..opts.starts.max(1))
        .into_par_iter()
        .map(|s| power_run(op, opts, s))
        .collect::<Result<_>>()?;
    let mut best = &runs[0];
    for r in &runs[1..] {
        if r.lambda > best.lambda {
            best = r;
        }
    }
    let iterations = runs.iter().map(|r| r.iterations).sum();
    if runs.iter().all(|r| r.lambda == 0.0) {
        return Ok(NormEstimate {
            value: 0.0,
            method: NormMethod::PowerIteration,
            certification: Certification::Exact,
            iterations,
            residual: 0.0,
        });
    }
    Ok(NormEstimate {
        value: best.lambda.sqrt(),
        method: NormMethod::PowerIteration,
        certification: if best.converged { Certification::LowerBound } else { Certification::Heuristic },
        iterations,
        residual: best.residual,
    })
}

/// Largest relative violation of `<A x, y> = <x, A* y>` over random probes.
pub fn adjoint_defect(op: &dyn LinearOperator, probes: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let mut x = gaussian_flat(&mut rng, op.input_shape().len());
        op.restrict_input(&mut x);
        let y = gaussian_flat(&mut rng, op.output_shape().len());
        let ax = op.apply(&x)?;
        let aty = op.adjoint_apply(&y)?;
        let lhs = flat_inner(&ax, &y);
        let rhs = flat_inner(&x, &aty);
        let scale = flat_norm(&ax) * flat_norm(&y) + flat_norm(&x) * flat_norm(&aty);
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn random_matrix(seed: u64, r: usize, k: usize) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_vec(r, k, gaussian_flat(&mut rng, r * k))
    }

    #[test]
    fn identity_singular_values() {
        let s = singular_values(&CMatrix::identity(3, 3)).unwrap();
        for x in s {
            assert!((x - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rank_one_singular_values() {
        let a = DVector::from_vec(vec![c(1.0), c(2.0), c(-2.0)]);
        let b = DVector::from_vec(vec![Complex64::new(0.0, 3.0), c(4.0)]);
        let m = &a * b.adjoint();
        let s = singular_values(&m).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s[0] - 15.0).abs() < 1e-12);
        assert!(s[1].abs() < 1e-12);
        for p in [1.0, 1.5, 2.0, 7.0, f64::INFINITY] {
            assert!((schatten_norm(&m, p).unwrap() - 15.0).abs() < 1e-11);
        }
    }

    #[test]
    fn frobenius_identity_and_order() {
        let m = random_matrix(3, 5, 7);
        let s = singular_values(&m).unwrap();
        assert!(s.windows(2).all(|w| w[0] >= w[1]));
        let fro: f64 = m.iter().map(|z| z.norm_sqr()).sum();
        let ss: f64 = s.iter().map(|x| x * x).sum();
        assert!((fro - ss).abs() <= 1e-10 * fro);
    }

    #[test]
    fn svd_reconstructs() {
        let m = random_matrix(4, 6, 4);
        let d = svd(&m).unwrap();
        let sigma = CMatrix::from_diagonal(&DVector::from_iterator(4, d.s.iter().map(|&x| c(x))));
        let back = &d.u * sigma * d.v.adjoint();
        assert!((back - &m).norm() < 1e-12 * m.norm());
    }

    #[test]
    fn rank_one_gram_matrices() {
        // rank-one Hermitian inputs once produced silently wrong factorizations
        let mut g = crate::sampling::rng(9);
        for _ in 0..400 {
            let n = 2 + rand::Rng::random_range(&mut g, 0..5);
            let u = crate::sampling::unit_vector(&mut g, n);
            let v = crate::sampling::unit_vector(&mut g, n);
            let c = &u * v.adjoint();
            let gram = c.adjoint() * &c;
            let s = singular_values(&gram).unwrap();
            assert!((s[0] - 1.0).abs() < 1e-12, "{s:?}");
            assert!(s[1..].iter().all(|&x| x < 1e-12));
        }
    }

    #[test]
    fn jacobi_fallback_agrees() {
        let mut g = crate::sampling::rng(21);
        for (r, c, rank) in [(3, 3, 3), (4, 2, 2), (2, 5, 2), (5, 5, 2), (4, 4, 0), (1, 1, 1)] {
            let a = crate::sampling::gaussian_matrix(&mut g, r, rank) * crate::sampling::gaussian_matrix(&mut g, rank, c);
            let (u, s, v) = jacobi_svd(&a).unwrap();
            assert!(reconstruction_ok(&a, &u, &s, &v));
            let k = r.min(c);
            assert!((u.adjoint() * &u - CMatrix::identity(k, k)).norm() < 1e-12);
            assert!((v.adjoint() * &v - CMatrix::identity(k, k)).norm() < 1e-12);
            let mut s = s;
            s.sort_by(|x, y| y.total_cmp(x));
            for (x, y) in s.iter().zip(singular_values(&a).unwrap()) {
                assert!((x - y).abs() < 1e-12 * (1.0 + y));
            }
        }
    }

    #[test]
    fn nearly_singular_input_reconstructs() {
        let z = |re, im| Complex64::new(re, im);
        let a = CMatrix::from_row_slice(2, 2, &[
            z(3.6407089473593834e-1, -1.805195423128226e-2),
            z(-9.02597711564449e-3, 7.010638581249508e-1),
            z(-3.987630779662137e-2, -3.610390846256454e-2),
            z(7.409401659215205e-2, -7.220781692515622e-2),
        ]);
        let d = svd(&a).unwrap();
        assert!(reconstruction_ok(&a, &d.u, &d.s, &d.v));
    }

    #[test]
    fn non_finite_rejected() {
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = c(f64::NAN);
        assert!(matches!(singular_values(&m), Err(Error::NonFinite)));
    }

    #[test]
    fn schatten_cases() {
        assert!((schatten_norm(&CMatrix::identity(4, 4), 1.0).unwrap() - 4.0).abs() < 1e-12);
        let mut t = CMatrix::zeros(2, 2);
        t[(0, 1)] = c(1.0);
        assert!((schatten_norm(&t, 1.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(matches!(schatten_norm(&t, 0.5), Err(Error::ExponentOutOfRange(_))));
    }

    #[test]
    fn schatten_monotone_in_p() {
        for seed in 0..20 {
            let m = random_matrix(100 + seed, 5, 5);
            let ps = [1.0, 1.3, 2.0, 3.0, 8.0, f64::INFINITY];
            let vals: Vec<f64> = ps.iter().map(|&p| schatten_norm(&m, p).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[0] >= w[1] - 1e-12), "{vals:?}");
        }
    }

    #[test]
    fn psd_sqrt_cases() {
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(4.0), c(9.0)]));
        let r = psd_sqrt(&d).unwrap();
        let expect = CMatrix::from_diagonal(&DVector::from_vec(vec![c(2.0), c(3.0)]));
        assert!((r - expect).norm() < 1e-12);
        assert_eq!(psd_sqrt(&CMatrix::zeros(3, 3)).unwrap(), CMatrix::zeros(3, 3));

        let mut nh = CMatrix::identity(2, 2);
        nh[(0, 1)] = c(1.0);
        assert!(matches!(psd_sqrt(&nh), Err(Error::NotHermitian(_))));
        let neg = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-0.5)]));
        assert!(matches!(psd_sqrt(&neg), Err(Error::NotPsd(_))));
        let tiny = CMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(-1e-12)]));
        assert!(psd_sqrt(&tiny).is_ok());
    }

    #[test]
    fn psd_sqrt_squares_back() {
        for seed in 0..10 {
            let b = random_matrix(200 + seed, 4, 4);
            let a = b.adjoint() * &b;
            let r = psd_sqrt(&a).unwrap();
            assert!((&r * &r - &a).norm() <= 1e-8 * a.norm());
            assert!((&r - abs_matrix(&b).unwrap()).norm() <= 1e-8 * r.norm());
        }
    }

    #[test]
    fn dual_unitary_cases() {
        let d = CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(1.0), c(2.0)]));
        let v = dual_unitary(&d).unwrap();
        assert!((&v - CMatrix::identity(3, 3)).norm() < 1e-12);

        let mut e12 = CMatrix::zeros(2, 2);
        e12[(0, 1)] = c(1.0);
        let v = dual_unitary(&e12).unwrap();
        assert!(((&v * &e12).trace() - c(1.0)).norm() < 1e-12);
        assert!((v[(1, 0)].norm() - 1.0).abs() < 1e-12);
        assert!((&v.adjoint() * &v - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn dual_unitary_beats_random_unitaries() {
        let m = random_matrix(7, 5, 5);
        let v = dual_unitary(&m).unwrap();
        let s1 = schatten_norm(&m, 1.0).unwrap();
        let best = (&v * &m).trace();
        assert!((best.re - s1).abs() <= 1e-8 * (1.0 + s1));
        assert!(best.im.abs() <= 1e-8 * (1.0 + s1));
        for seed in 0..1000 {
            let q = dual_unitary(&random_matrix(10_000 + seed, 5, 5)).unwrap();
            assert!((&q * &m).trace().re <= best.re + 1e-10);
        }
    }

    #[test]
    fn power_on_diagonal() {
        let op = DenseOperator {
            matrix: CMatrix::from_diagonal(&DVector::from_vec(vec![c(3.0), c(1.0)])),
        };
        let est = operator_norm_power(&op, &PowerOptions::with_seed(1)).unwrap();
        assert!((est.value - 3.0).abs() < 1e-6);
        assert_eq!(est.certification, Certification::LowerBound);
    }

    #[test]
    fn power_matches_dense_svd() {
        let m = random_matrix(11, 40, 40);
        let exact = exact_operator_norm(&m).unwrap();
        let est = operator_norm_power(&DenseOperator { matrix: m }, &PowerOptions::with_seed(5)).unwrap();
        assert!((est.value - exact.value).abs() <= 1e-6 * exact.value, "{est:?} vs {exact:?}");
        assert!(est.value <= exact.value + 1e-8);
    }

    #[test]
    fn power_on_zero_and_budget() {
        let zero = DenseOperator { matrix: CMatrix::zeros(3, 3) };
        let est = operator_norm_power(&zero, &PowerOptions::default()).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.certification, Certification::Exact);

        let m = random_matrix(12, 30, 30);
        let opts = PowerOptions { max_iter: 2, tol: 1e-15, ..PowerOptions::default() };
        let est = operator_norm_power(&DenseOperator { matrix: m }, &opts).unwrap();
        assert_eq!(est.certification, Certification::Heuristic);
    }

    #[test]
    fn clip_keeps_small_and_clamps_large() {
        let m = random_matrix(13, 3, 3) * c(5.0);
        let clipped = clip_to_unit_ball(&m).unwrap();
        assert!(spectral_norm(&clipped).unwrap() <= 1.0 + 1e-12);
        let small = CMatrix::identity(3, 3) * c(0.5);
        assert_eq!(clip_to_unit_ball(&small).unwrap(), small);
    }
}
