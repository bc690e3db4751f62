//! JSON symbol files: `{"n": n, "depth": K, "values": [atom, ...]}` where each
//! atom lists its `n * n` entries row-major as `[re, im]` pairs.

use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dyadic::{CMatrix, MatrixStepFunction};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolFile {
    pub n: usize,
    pub depth: usize,
    pub values: Vec<Vec<[f64; 2]>>,
}

impl SymbolFile {
    pub fn from_symbol(b: &MatrixStepFunction) -> Self {
        let n = b.n();
        let values = b
            .values()
            .iter()
            .map(|m| (0..n * n).map(|e| m[(e / n, e % n)]).map(|z| [z.re, z.im]).collect())
            .collect();
        Self { n, depth: b.depth(), values }
    }

    pub fn to_symbol(&self) -> Result<MatrixStepFunction> {
        let n = self.n;
        if self.depth > 30 || self.values.len() != 1usize << self.depth {
            return Err(Error::ShapeMismatch(format!(
                "depth {} needs 2^depth atoms, found {}",
                self.depth,
                self.values.len()
            )));
        }
        let mut mats = Vec::with_capacity(self.values.len());
        for (j, atom) in self.values.iter().enumerate() {
            if atom.len() != n * n {
                return Err(Error::ShapeMismatch(format!("atom {j} has {} entries, expected {}", atom.len(), n * n)));
            }
            mats.push(CMatrix::from_row_iterator(n, n, atom.iter().map(|&[re, im]| Complex64::new(re, im))));
        }
        MatrixStepFunction::new(n, self.depth, mats)
    }
}

pub fn parse_symbol(text: &str) -> Result<MatrixStepFunction> {
    serde_json::from_str::<SymbolFile>(text)?.to_symbol()
}

pub fn read_symbol(path: &Path) -> Result<MatrixStepFunction> {
    parse_symbol(&std::fs::read_to_string(path)?)
}

pub fn write_symbol(path: &Path, b: &MatrixStepFunction) -> Result<()> {
    std::fs::write(path, serde_json::to_string(&SymbolFile::from_symbol(b))?)?;
    Ok(())
}
