//! Dyadic filtration on `[0, 1)`: step functions, conditional expectations,
//! martingale differences and Rademacher functions.
//!
//! A step function of depth `K` stores one value per finest atom `(K, j)`.
//! Matrix-valued and vector-valued functions share one representation: every
//! value is an `n x c` complex matrix, with `c = n` for [`Square`] and `c = 1`
//! for [`Column`].
//!
//! Haar sign convention: a difference at level `k` is `+coefficient` on the
//! left child and `-coefficient` on the right child of each level-`(k-1)` atom.

use std::fmt::Debug;
use std::marker::PhantomData;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<Complex64>;

/// Shape marker for the values of a [`StepFunction`].
pub trait ValueKind: Copy + Clone + Debug + Default + PartialEq + Send + Sync + 'static {
    const NAME: &'static str;
    fn cols(n: usize) -> usize;
}

/// `n x n` matrix values.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct Square;

/// Length-`n` column vector values.
#[derive(Copy, Clone, Debug, Default, PartialEq)]
pub struct Column;

impl ValueKind for Square {
    const NAME: &'static str = "matrix";
    fn cols(n: usize) -> usize {
        n
    }
}

impl ValueKind for Column {
    const NAME: &'static str = "vector";
    fn cols(_n: usize) -> usize {
        1
    }
}

/// The dyadic interval `[j 2^-k, (j+1) 2^-k)`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct DyadicAtom {
    pub level: usize,
    pub index: usize,
}

impl DyadicAtom {
    pub fn new(level: usize, index: usize) -> Result<Self> {
        if level >= usize::BITS as usize || index >= (1usize << level) {
            return Err(Error::InvalidArgument(format!(
                "atom index {index} out of range at level {level}"
            )));
        }
        Ok(Self { level, index })
    }

    pub fn parent(&self) -> Option<Self> {
        (self.level > 0).then(|| Self {
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    pub fn children(&self) -> [Self; 2] {
        let level = self.level + 1;
        [
            Self { level, index: 2 * self.index },
            Self { level, index: 2 * self.index + 1 },
        ]
    }

    pub fn interval(&self) -> (f64, f64) {
        let w = (-(self.level as f64)).exp2();
        (self.index as f64 * w, (self.index + 1) as f64 * w)
    }

    /// Finest-level atoms `(depth, j)` contained in this atom.
    pub fn finest_range(&self, depth: usize) -> std::ops::Range<usize> {
        let span = 1usize << (depth - self.level);
        self.index * span..(self.index + 1) * span
    }
}

/// Piecewise-constant function on the `2^depth` finest dyadic atoms.
#[derive(Clone, Debug, PartialEq)]
pub struct StepFunction<K: ValueKind> {
    n: usize,
    depth: usize,
    values: Vec<CMatrix>,
    _kind: PhantomData<K>,
}

pub type MatrixStepFunction = StepFunction<Square>;
pub type VectorStepFunction = StepFunction<Column>;

fn check_depth(depth: usize) -> Result<()> {
    if depth > 30 {
        return Err(Error::InvalidArgument(format!("depth {depth} too large")));
    }
    Ok(())
}

impl<K: ValueKind> StepFunction<K> {
    pub fn new(n: usize, depth: usize, values: Vec<CMatrix>) -> Result<Self> {
        check_depth(depth)?;
        if n == 0 {
            return Err(Error::InvalidArgument("dimension n must be positive".into()));
        }
        if values.len() != 1usize << depth {
            return Err(Error::ShapeMismatch(format!(
                "expected {} values for depth {depth}, got {}",
                1usize << depth,
                values.len()
            )));
        }
        let cols = K::cols(n);
        if let Some(bad) = values.iter().find(|v| v.shape() != (n, cols)) {
            return Err(Error::ShapeMismatch(format!(
                "expected {n}x{cols} values, got {}x{}",
                bad.nrows(),
                bad.ncols()
            )));
        }
        Ok(Self::from_parts(n, depth, values))
    }

    pub(crate) fn from_parts(n: usize, depth: usize, values: Vec<CMatrix>) -> Self {
        Self { n, depth, values, _kind: PhantomData }
    }

    pub fn zeros(n: usize, depth: usize) -> Self {
        Self::constant(n, depth, CMatrix::zeros(n, K::cols(n)))
    }

    pub fn constant(n: usize, depth: usize, value: CMatrix) -> Self {
        assert_eq!(value.shape(), (n, K::cols(n)));
        Self::from_parts(n, depth, vec![value; 1usize << depth])
    }

    pub fn from_fn(n: usize, depth: usize, mut f: impl FnMut(usize) -> CMatrix) -> Self {
        let values: Vec<_> = (0..1usize << depth).map(&mut f).collect();
        Self::new(n, depth, values).expect("from_fn produced a value of the wrong shape")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn cols(&self) -> usize {
        K::cols(self.n)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn value(&self, j: usize) -> &CMatrix {
        &self.values[j]
    }

    pub fn into_values(self) -> Vec<CMatrix> {
        self.values
    }

    pub fn same_shape<L: ValueKind>(&self, other: &StepFunction<L>) -> Result<()> {
        if self.n != other.n || self.depth != other.depth {
            return Err(Error::ShapeMismatch(format!(
                "(n={}, K={}) vs (n={}, K={})",
                self.n, self.depth, other.n, other.depth
            )));
        }
        Ok(())
    }

    pub fn map<L: ValueKind>(&self, f: impl Fn(&CMatrix) -> CMatrix) -> StepFunction<L> {
        StepFunction::new(self.n, self.depth, self.values.iter().map(f).collect())
            .expect("map produced a value of the wrong shape")
    }

    pub fn zip_map<L: ValueKind, M: ValueKind>(
        &self,
        other: &StepFunction<L>,
        f: impl Fn(&CMatrix, &CMatrix) -> CMatrix,
    ) -> Result<StepFunction<M>> {
        self.same_shape(other)?;
        StepFunction::new(
            self.n,
            self.depth,
            self.values.iter().zip(&other.values).map(|(a, b)| f(a, b)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|a| a * s)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .flat_map(|(a, b)| a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()))
            .fold(0.0, f64::max))
    }

    /// Entries of all values, atom-major and column-major inside each value.
    pub fn to_flat(&self) -> Vec<Complex64> {
        self.values.iter().flat_map(|v| v.iter().copied()).collect()
    }

    pub fn from_flat(n: usize, depth: usize, flat: &[Complex64]) -> Result<Self> {
        let cols = K::cols(n);
        let block = n * cols;
        if flat.len() != block << depth {
            return Err(Error::ShapeMismatch(format!(
                "flat length {} does not match n={n}, K={depth}",
                flat.len()
            )));
        }
        let values = flat
            .chunks_exact(block)
            .map(|c| CMatrix::from_column_slice(n, cols, c))
            .collect();
        Ok(Self::from_parts(n, depth, values))
    }

    /// Mean of the values over each level-`k` atom (`2^k` entries).
    pub fn atom_means(&self, k: usize) -> Result<Vec<CMatrix>> {
        self.check_level(k)?;
        let mut cur = self.values.clone();
        for _ in k..self.depth {
            cur = cur.chunks_exact(2).map(|p| (&p[0] + &p[1]) * Complex64::new(0.5, 0.0)).collect();
        }
        Ok(cur)
    }

    /// Replicates one value per level-`k` atom back to the finest level.
    pub fn from_level_values(n: usize, depth: usize, k: usize, coarse: &[CMatrix]) -> Result<Self> {
        if k > depth || coarse.len() != 1usize << k {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not describe level {k}",
                coarse.len()
            )));
        }
        let span = 1usize << (depth - k);
        let values = coarse.iter().flat_map(|v| std::iter::repeat_n(v.clone(), span)).collect();
        Self::new(n, depth, values)
    }

    fn check_level(&self, k: usize) -> Result<()> {
        if k > self.depth {
            return Err(Error::LevelOutOfRange { level: k, depth: self.depth });
        }
        Ok(())
    }

    /// Largest entrywise deviation of `self` from `E_m self`; zero iff `F_m`-measurable.
    pub fn measurability_defect(&self, m: usize) -> Result<f64> {
        self.max_abs_diff(&conditional_expectation(self, m)?)
    }

    pub fn l2_norm(&self) -> f64 {
        l2_inner(self, self).expect("same shape").re.max(0.0).sqrt()
    }
}

impl MatrixStepFunction {
    /// Pointwise conjugate transpose.
    pub fn adjoint(&self) -> Self {
        self.map(|a| a.adjoint())
    }

    /// Pointwise product `self(t) * other(t)`.
    pub fn mul<K: ValueKind>(&self, other: &StepFunction<K>) -> Result<StepFunction<K>> {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn identity(n: usize, depth: usize) -> Self {
        Self::constant(n, depth, CMatrix::identity(n, n))
    }

    /// Scalar step function times a fixed matrix.
    pub fn scalar_times(s: &VectorStepFunction, a: &CMatrix) -> Result<Self> {
        if s.n() != 1 {
            return Err(Error::ShapeMismatch("expected a scalar (n = 1) function".into()));
        }
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::ShapeMismatch("expected a square matrix".into()));
        }
        Self::new(n, s.depth(), s.values().iter().map(|v| a * v[(0, 0)]).collect())
    }
}

impl VectorStepFunction {
    pub fn from_scalars(depth: usize, values: &[Complex64]) -> Result<Self> {
        Self::new(1, depth, values.iter().map(|&v| CMatrix::from_element(1, 1, v)).collect())
    }

    pub fn scalars(&self) -> Option<Vec<Complex64>> {
        (self.n == 1).then(|| self.values.iter().map(|v| v[(0, 0)]).collect())
    }
}

/// The `k`-th martingale difference, one coefficient per level-`(k-1)` atom.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarLayer<K: ValueKind> {
    level: usize,
    coefficients: Vec<CMatrix>,
    _kind: PhantomData<K>,
}

impl<K: ValueKind> HaarLayer<K> {
    pub fn new(level: usize, coefficients: Vec<CMatrix>) -> Result<Self> {
        if level == 0 || coefficients.len() != 1usize << (level - 1) {
            return Err(Error::ShapeMismatch(format!(
                "layer {level} needs {} coefficients",
                if level == 0 { 0 } else { 1usize << (level - 1) }
            )));
        }
        Ok(Self { level, coefficients, _kind: PhantomData })
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn coefficients(&self) -> &[CMatrix] {
        &self.coefficients
    }

    /// The represented function as a step function of the given depth.
    pub fn expand(&self, depth: usize) -> Result<StepFunction<K>> {
        if self.level > depth {
            return Err(Error::LevelOutOfRange { level: self.level, depth });
        }
        let n = self.coefficients[0].nrows();
        let half = 1usize << (depth - self.level);
        let mut values = Vec::with_capacity(1usize << depth);
        for c in &self.coefficients {
            values.extend(std::iter::repeat_n(c.clone(), half));
            values.extend(std::iter::repeat_n(-c, half));
        }
        StepFunction::new(n, depth, values)
    }
}

/// Mean plus all martingale differences of a step function.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarDecomposition<K: ValueKind> {
    pub n: usize,
    pub depth: usize,
    pub mean: CMatrix,
    /// `layers[k - 1]` holds `d_k`.
    pub layers: Vec<HaarLayer<K>>,
    /// `means[k]` holds the atom means at level `k`.
    pub means: Vec<Vec<CMatrix>>,
}

impl<K: ValueKind> HaarDecomposition<K> {
    pub fn layer(&self, k: usize) -> &HaarLayer<K> {
        &self.layers[k - 1]
    }

    /// Rebuilds a step function from a mean and coefficient layers.
    pub fn synthesize(n: usize, depth: usize, mean: &CMatrix, layers: &[Vec<CMatrix>]) -> StepFunction<K> {
        debug_assert_eq!(layers.len(), depth);
        let mut cur = vec![mean.clone()];
        for coeffs in layers {
            let mut next = Vec::with_capacity(cur.len() * 2);
            for (v, c) in cur.iter().zip(coeffs) {
                next.push(v + c);
                next.push(v - c);
            }
            cur = next;
        }
        StepFunction::from_parts(n, depth, cur)
    }
}

pub fn haar_decompose<K: ValueKind>(f: &StepFunction<K>) -> HaarDecomposition<K> {
    let depth = f.depth();
    let half = Complex64::new(0.5, 0.0);
    let mut means = vec![Vec::new(); depth + 1];
    means[depth] = f.values().to_vec();
    let mut layers = Vec::with_capacity(depth);
    for level in (0..depth).rev() {
        let (avg, diff): (Vec<_>, Vec<_>) = means[level + 1]
            .chunks_exact(2)
            .map(|p| ((&p[0] + &p[1]) * half, (&p[0] - &p[1]) * half))
            .unzip();
        means[level] = avg;
        layers.push(HaarLayer { level: level + 1, coefficients: diff, _kind: PhantomData });
    }
    layers.reverse();
    HaarDecomposition { n: f.n(), depth, mean: means[0][0].clone(), layers, means }
}

/// `E_k F`: constant on level-`k` atoms, equal to the atom mean.
pub fn conditional_expectation<K: ValueKind>(f: &StepFunction<K>, k: usize) -> Result<StepFunction<K>> {
    let means = f.atom_means(k)?;
    StepFunction::from_level_values(f.n(), f.depth(), k, &means)
}

/// `d_k F = E_k F - E_{k-1} F` for `1 <= k <= depth`.
pub fn martingale_difference<K: ValueKind>(f: &StepFunction<K>, k: usize) -> Result<HaarLayer<K>> {
    if k == 0 || k > f.depth() {
        return Err(Error::LevelOutOfRange { level: k, depth: f.depth() });
    }
    let means = f.atom_means(k)?;
    let coefficients = means
        .chunks_exact(2)
        .map(|p| (&p[0] - &p[1]) * Complex64::new(0.5, 0.0))
        .collect();
    HaarLayer::new(k, coefficients)
}

/// Sums functions that are constant on level-`(k-1)` atoms.
///
/// `per_level[k - 1]` holds `2^(k-1)` values, one per level-`(k-1)` atom;
/// the result is the depth-`depth` step function of their sum.
pub fn sum_level_constants<K: ValueKind>(n: usize, depth: usize, per_level: &[Vec<CMatrix>]) -> StepFunction<K> {
    debug_assert_eq!(per_level.len(), depth);
    let cols = K::cols(n);
    if depth == 0 {
        return StepFunction::zeros(n, 0);
    }
    let mut acc = per_level[0].clone();
    for level in per_level.iter().skip(1) {
        acc = level.iter().enumerate().map(|(a, v)| &acc[a / 2] + v).collect();
    }
    let values = acc.into_iter().flat_map(|v| [v.clone(), v]).collect::<Vec<_>>();
    debug_assert!(values.iter().all(|v| v.shape() == (n, cols)));
    StepFunction::from_parts(n, depth, values)
}

/// Sign of the level-`level` Haar pattern at finest atom `j` of a depth-`depth` function.
pub fn haar_sign(j: usize, depth: usize, level: usize) -> f64 {
    debug_assert!(level >= 1 && level <= depth);
    if (j >> (depth - level)) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// The `i`-th Rademacher function as a scalar step function of depth `depth`.
pub fn rademacher(i: usize, depth: usize) -> Result<VectorStepFunction> {
    check_depth(depth)?;
    if i == 0 || i > depth {
        return Err(Error::LevelOutOfRange { level: i, depth });
    }
    let values: Vec<_> = (0..1usize << depth)
        .map(|j| Complex64::new(haar_sign(j, depth, i), 0.0))
        .collect();
    VectorStepFunction::from_scalars(depth, &values)
}

/// `int tr(F G*) dt` with normalized Lebesgue measure.
pub fn l2_inner<K: ValueKind>(f: &StepFunction<K>, g: &StepFunction<K>) -> Result<Complex64> {
    f.same_shape(g)?;
    Ok(flat_inner(&f.to_flat(), &g.to_flat()) / f.len() as f64)
}

/// Unweighted `sum x_i conj(y_i)`.
pub fn flat_inner(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn scalar(depth: usize, v: &[f64]) -> VectorStepFunction {
        VectorStepFunction::from_scalars(depth, &v.iter().map(|&x| c(x)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn expectation_of_two_atoms() {
        let f = scalar(1, &[2.0, 4.0]);
        let e = conditional_expectation(&f, 0).unwrap();
        assert_eq!(e.scalars().unwrap(), vec![c(3.0), c(3.0)]);
        assert_eq!(conditional_expectation(&f, 1).unwrap(), f);
        assert!(conditional_expectation(&f, 2).is_err());
    }

    #[test]
    fn expectation_level_one_depth_two() {
        let f = scalar(2, &[1.0, 3.0, 10.0, 20.0]);
        let e = conditional_expectation(&f, 1).unwrap();
        assert_eq!(e.scalars().unwrap(), vec![c(2.0), c(2.0), c(15.0), c(15.0)]);
    }

    #[test]
    fn rademacher_signs() {
        assert_eq!(rademacher(1, 2).unwrap().scalars().unwrap(), vec![c(1.), c(1.), c(-1.), c(-1.)]);
        assert_eq!(rademacher(2, 2).unwrap().scalars().unwrap(), vec![c(1.), c(-1.), c(1.), c(-1.)]);
        assert!(rademacher(3, 2).is_err());
        assert!(rademacher(0, 2).is_err());
    }

    #[test]
    fn rademacher_orthonormal_and_own_difference() {
        let depth = 4;
        for i in 1..=depth {
            let ri = rademacher(i, depth).unwrap();
            let layer = martingale_difference(&ri, i).unwrap();
            assert_eq!(layer.expand(depth).unwrap(), ri);
            assert_eq!(conditional_expectation(&ri, i - 1).unwrap(), VectorStepFunction::zeros(1, depth));
            for j in 1..=depth {
                let rj = rademacher(j, depth).unwrap();
                let ip = l2_inner(&ri, &rj).unwrap();
                assert_eq!(ip, c(if i == j { 1.0 } else { 0.0 }));
            }
        }
    }

    #[test]
    fn constant_function_has_zero_layers() {
        let f = MatrixStepFunction::constant(2, 3, CMatrix::from_element(2, 2, Complex64::new(1.0, 2.0)));
        for k in 1..=3 {
            let layer = martingale_difference(&f, k).unwrap();
            assert!(layer.coefficients().iter().all(|m| m.iter().all(|z| *z == Complex64::new(0.0, 0.0))));
        }
        assert!(martingale_difference(&f, 0).is_err());
        assert!(martingale_difference(&f, 4).is_err());
    }

    #[test]
    fn first_rademacher_difference_coefficient() {
        let r1 = rademacher(1, 1).unwrap();
        let layer = martingale_difference(&r1, 1).unwrap();
        assert_eq!(layer.coefficients().len(), 1);
        assert_eq!(layer.coefficients()[0][(0, 0)], c(1.0));
    }

    #[test]
    fn atoms() {
        let a = DyadicAtom::new(2, 3).unwrap();
        assert_eq!(a.parent(), Some(DyadicAtom { level: 1, index: 1 }));
        assert_eq!(a.interval(), (0.75, 1.0));
        let [l, r] = a.children();
        assert_eq!((l.index, r.index), (6, 7));
        assert_eq!(a.finest_range(4), 12..16);
        assert!(DyadicAtom::new(2, 4).is_err());
    }

    #[test]
    fn shape_errors() {
        assert!(MatrixStepFunction::new(2, 1, vec![CMatrix::zeros(2, 2)]).is_err());
        assert!(MatrixStepFunction::new(2, 0, vec![CMatrix::zeros(2, 1)]).is_err());
        let a = MatrixStepFunction::zeros(2, 1);
        let b = MatrixStepFunction::zeros(2, 2);
        assert!(l2_inner(&a, &b).is_err());
    }
}
