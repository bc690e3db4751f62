//! The experiment suites behind the CLI subcommands. Each returns a table and
//! the list of asserted invariants that failed.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::plot::PlotSpec;
use super::table::{Cell, Table};
use crate::dyadic::{haar_decompose, HaarDecomposition, MatrixStepFunction};
use crate::error::Result;
use crate::extremal::{
    pairing_decomposition_check, tensor_identity_check, theorem11_experiment, triangle_growth, sweep_experiment,
    GrowthMode,
};
use crate::paraproduct::{adjoint_by_products, adjoint_paraproduct_apply, jn_quantity, paraproduct_l2_norm, JnOptions};
use crate::sampling::{gaussian_step, random_sparse_symbol, random_symbol, rng, sample_seed, unit_vector, SymbolDistribution};
use crate::spectral::PowerOptions;
use crate::symbol::{bmo_c_norm, square_function, sweep, SymbolReport};

pub const SQUARE_BOUND_SLACK: f64 = 1e-8;
pub const JN_REL_TOL: f64 = 1e-6;
pub const SWEEP_MONOTONE_TOL: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteOutput {
    pub table: Table,
    pub violations: Vec<String>,
    pub plot: Option<PlotSpec>,
}

impl SuiteOutput {
    fn new(table: Table) -> Self {
        Self { table, violations: Vec::new(), plot: None }
    }
}

fn method_name<T: Serialize>(m: &T) -> String {
    serde_json::to_value(m).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default()
}

/// Norm report for one symbol.
pub fn norms(b: &MatrixStepFunction, seed: u64) -> Result<SuiteOutput> {
    let r = SymbolReport::compute(b)?;
    let square = bmo_c_norm(&square_function(b)?)?;
    let sweep_c = bmo_c_norm(&sweep(b))?;
    let pi = paraproduct_l2_norm(b, &PowerOptions::with_seed(seed))?;
    let mut t = Table::new(&[
        "n", "depth", "linf", "bmo_c", "bmo_r", "bmo_cr", "square_bmo_c", "sweep_bmo_c", "paraproduct_l2", "certification",
    ]);
    t.push(vec![
        r.n.into(),
        r.depth.into(),
        r.linf.into(),
        r.bmo_c.into(),
        r.bmo_r.into(),
        r.bmo_cr.into(),
        square.into(),
        sweep_c.into(),
        pi.value.into(),
        method_name(&pi.certification).into(),
    ]);
    let mut out = SuiteOutput::new(t);
    if square > 2f64.sqrt() * r.bmo_c + SQUARE_BOUND_SLACK {
        out.violations.push(format!("square function bound: {square} > sqrt(2) * {}", r.bmo_c));
    }
    Ok(out)
}

pub fn growth_theorem11(n_list: &[usize], mode: GrowthMode, seed: u64, budget: usize) -> Result<SuiteOutput> {
    let rows = theorem11_experiment(n_list, mode, seed, budget)?;
    let mut t = Table::new(&["n", "lower_bound", "ratio_to_log", "method", "pairing", "linf"]);
    let mut violations = Vec::new();
    for r in &rows {
        t.push(vec![
            r.n.into(),
            r.lower_bound.into(),
            r.ratio_to_log.into(),
            method_name(&r.method).into(),
            r.pairing.into(),
            r.linf.map_or(Cell::Text(String::new()), Cell::Real),
        ]);
        if mode == GrowthMode::Power {
            if r.lower_bound < r.pairing - 1e-6 {
                violations.push(format!("n = {}: power value {} below pairing {}", r.n, r.lower_bound, r.pairing));
            }
            if r.linf.is_some_and(|l| l > 1.0 + 1e-10) {
                violations.push(format!("n = {}: witness not contractive", r.n));
            }
        }
    }
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| r.n);
    for w in sorted.windows(2) {
        if w[1].n > w[0].n && w[1].pairing <= w[0].pairing {
            violations.push(format!("pairing value not increasing from n = {} to n = {}", w[0].n, w[1].n));
        }
    }
    Ok(SuiteOutput {
        table: t,
        violations,
        plot: Some(PlotSpec {
            title: "lower bound for ||pi_b|| with ||b||_inf <= 1".into(),
            x: "n".into(),
            ys: vec!["lower_bound".into(), "ratio_to_log".into()],
            log_x: true,
        }),
    })
}

pub fn growth_triangle(n_list: &[usize], starts: usize, seed: u64) -> Result<SuiteOutput> {
    let rows = triangle_growth(n_list, starts, seed)?;
    let mut t = Table::new(&["n", "lower_bound", "ratio_to_log", "uniform"]);
    let mut violations = Vec::new();
    for r in &rows {
        t.push(vec![r.n.into(), r.lower_bound.into(), r.ratio_to_log.into(), r.uniform.into()]);
    }
    for w in rows.windows(2) {
        if w[1].lower_bound < w[0].lower_bound - 1e-12 {
            violations.push(format!("search value decreased from n = {} to n = {}", w[0].n, w[1].n));
        }
    }
    Ok(SuiteOutput {
        table: t,
        violations,
        plot: Some(PlotSpec {
            title: "rank-one lower bound for triangular truncation on S^1".into(),
            x: "n".into(),
            ys: vec!["lower_bound".into(), "uniform".into(), "ratio_to_log".into()],
            log_x: true,
        }),
    })
}

pub fn sweep_growth(n_list: &[usize], budget: usize) -> Result<SuiteOutput> {
    let rows = sweep_experiment(n_list, budget)?;
    let mut t = Table::new(&["n", "value", "ratio_to_log"]);
    for r in &rows {
        t.push(vec![r.n.into(), r.value.into(), r.ratio_to_log.into()]);
    }
    let mut sorted = rows.clone();
    sorted.sort_by_key(|r| r.n);
    let mut violations = Vec::new();
    for w in sorted.windows(2) {
        if w[1].value < (1.0 - SWEEP_MONOTONE_TOL) * w[0].value {
            violations.push(format!("sweep BMO_c dropped from n = {} to n = {}", w[0].n, w[1].n));
        }
    }
    Ok(SuiteOutput {
        table: t,
        violations,
        plot: Some(PlotSpec {
            title: "BMO_c norm of the sweep of the witness symbols".into(),
            x: "n".into(),
            ys: vec!["value".into(), "ratio_to_log".into()],
            log_x: true,
        }),
    })
}

/// Size of fuzz sample `i`: `n` in `1..=nmax`, depth in `1..=kmax`.
fn sample_shape(seed: u64, i: u64, nmax: usize, kmax: usize) -> (usize, usize, u64) {
    let s = sample_seed(seed, i);
    let n = 1 + (s % nmax.max(1) as u64) as usize;
    let k = 1 + ((s >> 20) % kmax.max(1) as u64) as usize;
    (n, k, s)
}

/// Even samples are Gaussian symbols, odd samples sparse rank-one ones.
pub fn random_fuzz_symbol(seed: u64, i: u64, nmax: usize, kmax: usize) -> Result<MatrixStepFunction> {
    let (n, k, s) = sample_shape(seed, i, nmax, kmax);
    let mut g = rng(s);
    if i % 2 == 0 {
        random_symbol(&mut g, n, k, SymbolDistribution { contractive: false })
    } else {
        Ok(random_sparse_symbol(&mut g, n, k, 0.4))
    }
}

pub fn square_bound_fuzz(samples: usize, nmax: usize, kmax: usize, seed: u64) -> Result<SuiteOutput> {
    let rows: Vec<(usize, usize, f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let b = random_fuzz_symbol(seed, i, nmax, kmax)?;
            Ok((b.n(), b.depth(), bmo_c_norm(&b)?, bmo_c_norm(&square_function(&b)?)?))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["sample", "n", "depth", "bmo_c", "square_bmo_c", "ratio"]);
    let mut violations = Vec::new();
    for (i, &(n, k, c, s)) in rows.iter().enumerate() {
        let ratio = if c > 0.0 { s / c } else { 0.0 };
        t.push(vec![i.into(), n.into(), k.into(), c.into(), s.into(), ratio.into()]);
        if s > 2f64.sqrt() * c + SQUARE_BOUND_SLACK {
            violations.push(format!("sample {i}: {s} > sqrt(2) * {c}"));
        }
    }
    Ok(SuiteOutput { table: t, violations, plot: None })
}

pub fn jn_check(samples: usize, nmax: usize, kmax: usize, q: f64, seed: u64) -> Result<SuiteOutput> {
    let rows: Vec<(usize, usize, f64, f64)> = (0..samples as u64)
        .into_par_iter()
        .map(|i| {
            let b = random_fuzz_symbol(seed, i, nmax, kmax)?;
            let jn = jn_quantity(&b, q, &JnOptions::with_seed(sample_seed(seed ^ 0x4a4e, i)))?;
            Ok((b.n(), b.depth(), crate::symbol::bmo_cr_norm(&b)?, jn))
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["sample", "n", "depth", "q", "bmo_cr", "jn", "rel_diff"]);
    let mut violations = Vec::new();
    for (i, &(n, k, cr, jn)) in rows.iter().enumerate() {
        let rel = (jn - cr).abs() / cr.max(1e-300);
        t.push(vec![i.into(), n.into(), k.into(), q.into(), cr.into(), jn.into(), rel.into()]);
        if q == 2.0 && rel > JN_REL_TOL {
            violations.push(format!("sample {i}: jn {jn} vs bmo_cr {cr}"));
        }
        if !jn.is_finite() {
            violations.push(format!("sample {i}: non-finite value"));
        }
    }
    Ok(SuiteOutput { table: t, violations, plot: None })
}

#[derive(Clone, Debug)]
struct Check {
    name: &'static str,
    instances: usize,
    max_residual: f64,
    tolerance: f64,
}

fn parseval_defect(dec: &HaarDecomposition<crate::dyadic::Square>, f: &MatrixStepFunction) -> f64 {
    let mut energy = dec.mean.norm_squared();
    for (l, layer) in dec.layers.iter().enumerate() {
        let w = (-(l as f64)).exp2();
        energy += w * layer.coefficients().iter().map(|c| c.norm_squared()).sum::<f64>();
    }
    let direct = f.l2_norm().powi(2);
    (energy - direct).abs() / direct.max(1e-300)
}

/// Haar reconstruction, Parseval, the rank-one tensor identity, the
/// decomposition of the adjoint and the `total = I + II` split.
pub fn identity_suite(instances: usize, seed: u64) -> Result<SuiteOutput> {
    let per = |name: &'static str, tolerance: f64, f: &(dyn Fn(u64) -> Result<f64> + Sync)| -> Result<Check> {
        let vals: Vec<f64> = (0..instances as u64).into_par_iter().map(f).collect::<Result<_>>()?;
        Ok(Check { name, instances, max_residual: vals.into_iter().fold(0.0, f64::max), tolerance })
    };
    let checks = vec![
        per("haar-reconstruction", 1e-12, &|i| {
            let mut g = rng(sample_seed(seed, i));
            let (n, k) = (1 + (i % 4) as usize, 1 + (i % 6) as usize);
            let f: MatrixStepFunction = gaussian_step(&mut g, n, k);
            let d = haar_decompose(&f);
            let layers: Vec<_> = d.layers.iter().map(|l| l.coefficients().to_vec()).collect();
            HaarDecomposition::synthesize(n, k, &d.mean, &layers).max_abs_diff(&f)
        })?,
        per("parseval", 1e-12, &|i| {
            let mut g = rng(sample_seed(seed ^ 1, i));
            let (n, k) = (1 + (i % 4) as usize, 1 + (i % 6) as usize);
            let f: MatrixStepFunction = gaussian_step(&mut g, n, k);
            Ok(parseval_defect(&haar_decompose(&f), &f))
        })?,
        per("tensor-identity", 1e-10, &|i| {
            let mut g = rng(sample_seed(seed ^ 2, i));
            let n = 1 + (i % 8) as usize;
            let a = unit_vector(&mut g, n);
            let b = unit_vector(&mut g, n);
            tensor_identity_check(&a, &b)
        })?,
        per("adjoint-decomposition", 1e-10, &|i| {
            let mut g = rng(sample_seed(seed ^ 3, i));
            let (n, k) = (1 + (i % 4) as usize, 1 + (i % 5) as usize);
            let b: MatrixStepFunction = gaussian_step(&mut g, n, k);
            let f: MatrixStepFunction = gaussian_step(&mut g, n, k);
            adjoint_by_products(&b, &f)?.max_abs_diff(&adjoint_paraproduct_apply(&b, &f)?)
        })?,
        per("pairing-split", 1e-8, &|i| {
            let p = pairing_decomposition_check(1 + (i % 4) as usize, sample_seed(seed ^ 4, i))?;
            Ok(p.identity_defect())
        })?,
    ];
    let mut t = Table::new(&["check", "instances", "max_residual", "tolerance"]);
    let mut violations = Vec::new();
    for c in &checks {
        t.push(vec![c.name.into(), c.instances.into(), c.max_residual.into(), c.tolerance.into()]);
        if !(c.max_residual <= c.tolerance) {
            violations.push(format!("{}: residual {} exceeds {}", c.name, c.max_residual, c.tolerance));
        }
    }
    Ok(SuiteOutput { table: t, violations, plot: None })
}

/// Constant symbol used by examples and smoke tests.
pub fn constant_symbol(n: usize, depth: usize, value: Complex64) -> MatrixStepFunction {
    MatrixStepFunction::constant(n, depth, crate::dyadic::CMatrix::from_element(n, n, value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_symbol_norms_vanish() {
        let out = norms(&constant_symbol(2, 3, Complex64::new(0.7, -0.2)), 1).unwrap();
        for col in ["bmo_c", "bmo_r", "bmo_cr", "square_bmo_c", "sweep_bmo_c", "paraproduct_l2"] {
            assert_eq!(out.table.column(col).unwrap(), vec![0.0], "{col}");
        }
        assert!(out.violations.is_empty());
    }

    #[test]
    fn small_suites_are_clean() {
        assert!(square_bound_fuzz(20, 4, 4, 1).unwrap().violations.is_empty());
        assert!(jn_check(4, 3, 3, 2.0, 1).unwrap().violations.is_empty());
        assert!(identity_suite(6, 2).unwrap().violations.is_empty());
        let g = growth_theorem11(&[4, 16], GrowthMode::Pairing, 7, 16).unwrap();
        assert_eq!(&g.table.columns[..3], &["n", "lower_bound", "ratio_to_log"]);
        assert!(g.violations.is_empty());
    }

    #[test]
    fn fuzz_shapes_stay_in_range() {
        for i in 0..200 {
            let (n, k, _) = sample_shape(5, i, 8, 6);
            assert!((1..=8).contains(&n) && (1..=6).contains(&k));
        }
    }
}
