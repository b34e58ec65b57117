use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SdpError {
    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("entry ({row}, {col}) outside a block of size {dim}")]
    OutOfRange { row: usize, col: usize, dim: usize },
    #[error("variable index {index} out of range ({nvars} variables)")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("objective has length {got}, expected {expected}")]
    ObjectiveLength { expected: usize, got: usize },
    #[error("problem has no decision variables")]
    NoVariables,
    #[error("problem has no constraints")]
    NoConstraints,
}

/// Symmetric matrix stored as its upper-triangle nonzeros (`row <= col`).
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymMat {
    pub dim: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl SymMat {
    pub fn zeros(dim: usize) -> Self {
        SymMat {
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = SymMat::zeros(dim);
        for i in 0..dim {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Adds `v` at `(i, j)` and, implicitly, at `(j, i)`.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.dim && j < self.dim, "entry outside block");
        let key = (i.min(j), i.max(j));
        let e = self.entries.entry(key).or_insert(0.0);
        *e += v;
        if *e == 0.0 {
            self.entries.remove(&key);
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let key = (i.min(j), i.max(j));
        if v == 0.0 {
            self.entries.remove(&key);
        } else {
            self.entries.insert(key, v);
        }
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .get(&(i.min(j), i.max(j)))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Upper-triangle entries `(row, col, value)` in row-major order.
    pub fn upper(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.entries.iter().map(|(&(i, j), &v)| (i, j, v))
    }

    /// Every nonzero position, both triangles.
    pub fn full_entries(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::with_capacity(2 * self.entries.len());
        for (&(i, j), &v) in &self.entries {
            out.push((i, j, v));
            if i != j {
                out.push((j, i, v));
            }
        }
        out
    }

    pub fn from_dense(m: &DMatrix<f64>) -> Result<Self, SdpError> {
        let dim = m.nrows();
        let mut s = SymMat::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                if m[(i, j)] != m[(j, i)] {
                    return Err(SdpError::NotSymmetric { row: i, col: j });
                }
                s.set(i, j, m[(i, j)]);
            }
        }
        Ok(s)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (&(i, j), &v) in &self.entries {
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
        m
    }

    pub fn scaled(&self, c: f64) -> SymMat {
        let mut out = SymMat::zeros(self.dim);
        for (&(i, j), &v) in &self.entries {
            out.set(i, j, v * c);
        }
        out
    }

    pub fn frobenius(&self) -> f64 {
        self.full_entries()
            .iter()
            .map(|(_, _, v)| v * v)
            .sum::<f64>()
            .sqrt()
    }
}

/// Affine symmetric map `F0 + Σ z_i F_i`, required to be PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct LmiBlock {
    pub dim: usize,
    pub constant: SymMat,
    pub coefs: BTreeMap<usize, SymMat>,
}

impl LmiBlock {
    pub fn new(dim: usize) -> Self {
        LmiBlock {
            dim,
            constant: SymMat::zeros(dim),
            coefs: BTreeMap::new(),
        }
    }

    /// Adds `v` at `(i, j)` of the coefficient of `var` (`None` = constant).
    pub fn add(&mut self, var: Option<usize>, i: usize, j: usize, v: f64) {
        match var {
            None => self.constant.add(i, j, v),
            Some(k) => {
                let dim = self.dim;
                let m = self.coefs.entry(k).or_insert_with(|| SymMat::zeros(dim));
                m.add(i, j, v);
                if m.is_empty() {
                    self.coefs.remove(&k);
                }
            }
        }
    }

    pub fn eval(&self, z: &[f64]) -> DMatrix<f64> {
        let mut m = self.constant.to_dense();
        for (&k, f) in &self.coefs {
            for (i, j, v) in f.upper() {
                m[(i, j)] += z[k] * v;
                if i != j {
                    m[(j, i)] += z[k] * v;
                }
            }
        }
        m
    }

    pub fn scaled(&self, c: f64) -> LmiBlock {
        LmiBlock {
            dim: self.dim,
            constant: self.constant.scaled(c),
            coefs: self.coefs.iter().map(|(&k, m)| (k, m.scaled(c))).collect(),
        }
    }
}

/// Scalar affine constraint `constant + Σ coef_i z_i ≥ 0`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AffineRow {
    pub constant: f64,
    pub coefs: BTreeMap<usize, f64>,
}

impl AffineRow {
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.constant + self.coefs.iter().map(|(&k, &v)| v * z[k]).sum::<f64>()
    }
}

/// `maximize cᵀz` subject to PSD blocks and scalar inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub nvars: usize,
    pub objective: Vec<f64>,
    pub blocks: Vec<LmiBlock>,
    pub ineqs: Vec<AffineRow>,
}

impl SdpProblem {
    pub fn new(nvars: usize) -> Self {
        SdpProblem {
            nvars,
            objective: vec![0.0; nvars],
            blocks: Vec::new(),
            ineqs: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<(), SdpError> {
        if self.nvars == 0 {
            return Err(SdpError::NoVariables);
        }
        if self.objective.len() != self.nvars {
            return Err(SdpError::ObjectiveLength {
                expected: self.nvars,
                got: self.objective.len(),
            });
        }
        if self.blocks.is_empty() && self.ineqs.is_empty() {
            return Err(SdpError::NoConstraints);
        }
        let check_var = |k: usize| {
            if k >= self.nvars {
                Err(SdpError::VariableOutOfRange {
                    index: k,
                    nvars: self.nvars,
                })
            } else {
                Ok(())
            }
        };
        for b in &self.blocks {
            for m in std::iter::once(&b.constant).chain(b.coefs.values()) {
                if m.dim != b.dim {
                    return Err(SdpError::OutOfRange {
                        row: m.dim,
                        col: m.dim,
                        dim: b.dim,
                    });
                }
            }
            for &k in b.coefs.keys() {
                check_var(k)?;
            }
        }
        for r in &self.ineqs {
            for &k in r.coefs.keys() {
                check_var(k)?;
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, z: &[f64]) -> f64 {
        self.objective.iter().zip(z).map(|(c, v)| c * v).sum()
    }

    /// Smallest eigenvalue over blocks and smallest inequality value at `z`.
    pub fn margin(&self, z: &[f64]) -> f64 {
        let mut m = f64::INFINITY;
        for b in &self.blocks {
            m = m.min(min_eigenvalue(&b.eval(z)));
        }
        for r in &self.ineqs {
            m = m.min(r.eval(z));
        }
        m
    }

    /// Does variable `k` appear in any constraint?
    pub fn is_referenced(&self, k: usize) -> bool {
        self.blocks.iter().any(|b| b.coefs.contains_key(&k))
            || self.ineqs.iter().any(|r| r.coefs.contains_key(&k))
    }
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct OptResult {
    pub status: SolveStatus,
    /// Objective value `cᵀz` at `point`.
    pub value: f64,
    pub point: Vec<f64>,
    /// Smallest block eigenvalue / inequality value at `point`, recomputed directly.
    pub margin: f64,
    /// `bound - value`, with `bound` the final dual objective.
    pub gap: f64,
    /// Upper bound on the optimum from the dual iterate.
    pub bound: f64,
    pub iterations: usize,
    /// Optimal margin of the phase-one problem, when it was run.
    pub phase_one: Option<f64>,
    pub message: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmat_symmetry_check() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 1.0]);
        assert_eq!(
            SymMat::from_dense(&m),
            Err(SdpError::NotSymmetric { row: 0, col: 1 })
        );
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let s = SymMat::from_dense(&m).unwrap();
        assert_eq!(s.to_dense(), m);
        assert_eq!(s.full_entries().len(), 4);
    }

    #[test]
    fn block_eval_and_margin() {
        let mut b = LmiBlock::new(2);
        b.add(None, 0, 0, 1.0);
        b.add(None, 1, 1, 1.0);
        b.add(Some(0), 0, 1, 1.0);
        let mut p = SdpProblem::new(1);
        p.blocks.push(b);
        let m = p.margin(&[0.5]);
        assert!((m - 0.5).abs() < 1e-12);
    }
}
